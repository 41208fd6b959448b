// report.hpp
//
// Run-level report assembly.  Every emitted report names the subcommand,
// embeds the config hash and the condition verdicts, and formats numbers
// with 12 significant digits in both the CSV and the JSON rendering.

#pragma once

#include "bosejj/ness.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bosejj {

class RunReport {
  public:
    RunReport(std::string subcommand, std::uint64_t config_hash);

    void add_scalar(const std::string& key, double value);
    void add_integer(const std::string& key, long long value);
    void add_flag(const std::string& key, bool value);
    void add_text(const std::string& key, const std::string& value);
    void add_conditions(const ConditionReport& conditions);
    void add_warning(const std::string& text);
    void add_artifact(const std::string& filename);

    const std::vector<std::string>& artifacts() const { return artifacts_; }

    std::string to_csv() const;
    std::string to_json() const;

  private:
    struct Entry {
        enum class Kind { Number, Integer, Flag, Text };
        std::string key;
        Kind kind;
        double num = 0.0;
        long long inum = 0;
        bool flag = false;
        std::string text;
    };

    std::string subcommand_;
    std::string hash_;
    std::vector<Entry> entries_;
    std::vector<std::string> warnings_;
    std::vector<std::string> artifacts_;
};

}  // namespace bosejj
