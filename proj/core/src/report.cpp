#include "bosejj/report.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <utility>

namespace bosejj {

namespace {

// Rounding through the 12-digit text form keeps JSON numbers and CSV cells
// in exact agreement.
double rounded12(double v) { return std::strtod(format_sig12(v).c_str(), nullptr); }

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

RunReport::RunReport(std::string subcommand, std::uint64_t config_hash)
    : subcommand_(std::move(subcommand)), hash_(hash_hex(config_hash)) {}

void RunReport::add_scalar(const std::string& key, double value) {
    Entry e;
    e.key = key;
    e.kind = Entry::Kind::Number;
    e.num = value;
    entries_.push_back(std::move(e));
}

void RunReport::add_integer(const std::string& key, long long value) {
    Entry e;
    e.key = key;
    e.kind = Entry::Kind::Integer;
    e.inum = value;
    entries_.push_back(std::move(e));
}

void RunReport::add_flag(const std::string& key, bool value) {
    Entry e;
    e.key = key;
    e.kind = Entry::Kind::Flag;
    e.flag = value;
    entries_.push_back(std::move(e));
}

void RunReport::add_text(const std::string& key, const std::string& value) {
    Entry e;
    e.key = key;
    e.kind = Entry::Kind::Text;
    e.text = value;
    entries_.push_back(std::move(e));
}

void RunReport::add_conditions(const ConditionReport& c) {
    add_flag("condition_resolvent_bounded", c.resolvent_sup.bounded);
    add_scalar("condition_resolvent_sup", c.resolvent_sup.c_g);
    add_flag("condition_gap_pass", c.eta_gap.pass);
    add_scalar("condition_gap_min_abs", c.eta_gap.min_abs);
    add_scalar("condition_gap_argmin", c.eta_gap.argmin);
    add_scalar("condition_gap_threshold", c.eta_gap.threshold);
    add_flag("condition_eta_zero_finite", c.eta_zero_finite);
    add_flag("condition_moment_growth_assumed", c.moment_growth_assumed);
}

void RunReport::add_warning(const std::string& text) { warnings_.push_back(text); }

void RunReport::add_artifact(const std::string& filename) { artifacts_.push_back(filename); }

std::string RunReport::to_csv() const {
    std::string s = "key,value\n";
    s += "subcommand," + subcommand_ + '\n';
    s += "config_hash," + hash_ + '\n';
    for (const Entry& e : entries_) {
        s += e.key + ',';
        switch (e.kind) {
            case Entry::Kind::Number: s += format_sig12(e.num); break;
            case Entry::Kind::Integer: s += std::to_string(e.inum); break;
            case Entry::Kind::Flag: s += e.flag ? "1" : "0"; break;
            case Entry::Kind::Text: s += e.text; break;
        }
        s += '\n';
    }
    for (std::size_t i = 0; i < warnings_.size(); ++i)
        s += "warning_" + std::to_string(i) + ',' + warnings_[i] + '\n';
    for (std::size_t i = 0; i < artifacts_.size(); ++i)
        s += "artifact_" + std::to_string(i) + ',' + artifacts_[i] + '\n';
    return s;
}

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand_;
    j["config_hash"] = hash_;
    nlohmann::ordered_json results;
    for (const Entry& e : entries_) {
        switch (e.kind) {
            case Entry::Kind::Number: results[e.key] = rounded12(e.num); break;
            case Entry::Kind::Integer: results[e.key] = e.inum; break;
            case Entry::Kind::Flag: results[e.key] = e.flag; break;
            case Entry::Kind::Text: results[e.key] = e.text; break;
        }
    }
    j["results"] = std::move(results);
    j["warnings"] = warnings_;
    j["artifacts"] = artifacts_;
    return j.dump(2) + '\n';
}

}  // namespace bosejj
