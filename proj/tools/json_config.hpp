#pragma once

// CLI11 config reader for JSON files. Top-level keys are subcommand names,
// nested keys are long option names without dashes:
//
//   {"explore": {"step": 5, "seed": 7}, "serve": {"addr": "0.0.0.0:8765"}}

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace tactile::cli {

class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override
    {
        nlohmann::json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames()[0];
            if (opt->get_type_size() != 0) {
                if (opt->count() == 1) {
                    j[name] = opt->results().at(0);
                } else if (opt->count() > 1) {
                    j[name] = opt->results();
                } else if (default_also && !opt->get_default_str().empty()) {
                    j[name] = opt->get_default_str();
                }
            } else if (opt->count() > 0) {
                j[name] = true;
            }
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            const std::string text = to_config(sub, default_also, false, "");
            if (!text.empty() && text != "null") j[sub->get_name()] = nlohmann::json::parse(text);
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        return items(j, "", {});
    }

private:
    static std::string scalar(const nlohmann::json& v)
    {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    std::vector<CLI::ConfigItem> items(const nlohmann::json& j, const std::string& name,
                                       std::vector<std::string> prefix) const
    {
        std::vector<CLI::ConfigItem> out;
        if (j.is_object()) {
            if (!name.empty()) prefix.push_back(name);
            for (auto it = j.begin(); it != j.end(); ++it) {
                auto sub = items(*it, it.key(), prefix);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
        CLI::ConfigItem& item = out.emplace_back();
        item.name = name;
        item.parents = prefix;
        if (j.is_array()) {
            for (const auto& v : j) item.inputs.push_back(scalar(v));
        } else {
            item.inputs = {scalar(j)};
        }
        return out;
    }
};

}  // namespace tactile::cli
