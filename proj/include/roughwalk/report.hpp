#pragma once

// Report assembly and serialization. Every report embeds the effective
// config, its hash, the master seed, worker count and code version; the
// timestamp lives in a single top-level field so reproducibility diffs are
// trivial (payload_without_timestamp strips exactly that field).

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "roughwalk/limits.hpp"

namespace roughwalk {

inline constexpr const char* kCodeVersion = "roughwalk 0.1.0";

std::string fnv1a_hex(std::string_view bytes);

// %.17g, enough digits to round-trip a double
std::string format_full(double v);

class ReportBuilder {
public:
    ReportBuilder(std::string command, const nlohmann::json& effective_config, uint64_t master_seed,
                  int workers);
    ~ReportBuilder();

    void add_section(const std::string& section, const std::vector<MetricRow>& rows);
    void add_extra(const std::string& key, const nlohmann::json& value);

    bool all_pass() const { return all_pass_; }
    const std::vector<MetricRow>& rows() const { return rows_; }

    // deterministic payload (no timestamp), used for reproducibility checks
    std::string payload_without_timestamp() const;

    // payload stripped of worker-count metadata as well: this part must be
    // byte-identical for any worker count
    std::string numeric_payload() const;

    // full report with timestamp added
    std::string json_with_timestamp() const;

    // metrics table as CSV
    std::string metrics_csv() const;

private:
    struct Impl;
    Impl* impl_;
    std::vector<MetricRow> rows_;
    bool all_pass_ = true;
};

void write_text_file(const std::filesystem::path& path, std::string_view content);

// rows of (t, columns...) with a header line
std::string curves_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);

std::string trajectory_csv(const RegenTrajectory& traj);

}  // namespace roughwalk
