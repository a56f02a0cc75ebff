#include "roughwalk/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace roughwalk {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

json metric_json(const MetricRow& row) {
    json j;
    j["name"] = row.name;
    j["estimate"] = row.estimate;
    if (!std::isnan(row.se)) j["se"] = row.se;
    if (row.has_target) {
        j["target"] = row.target;
        if (!std::isnan(row.z)) j["z"] = row.z;
        j["pass"] = row.pass;
    }
    return j;
}

}  // namespace

struct ReportBuilder::Impl {
    json root;
};

ReportBuilder::ReportBuilder(std::string command, const json& effective_config, uint64_t master_seed,
                             int workers)
    : impl_(new Impl) {
    impl_->root["schema"] = "roughwalk-report-v1";
    impl_->root["command"] = std::move(command);
    impl_->root["config"] = effective_config;
    impl_->root["config_hash"] = fnv1a_hex(effective_config.dump());
    impl_->root["master_seed"] = master_seed;
    impl_->root["workers"] = workers;
    impl_->root["code_version"] = kCodeVersion;
    impl_->root["metrics"] = json::array();
}

ReportBuilder::~ReportBuilder() { delete impl_; }

void ReportBuilder::add_section(const std::string& section, const std::vector<MetricRow>& rows) {
    for (const MetricRow& row : rows) {
        json j = metric_json(row);
        j["section"] = section;
        impl_->root["metrics"].push_back(std::move(j));
        all_pass_ = all_pass_ && row.pass;
        rows_.push_back(row);
    }
}

void ReportBuilder::add_extra(const std::string& key, const json& value) { impl_->root[key] = value; }

std::string ReportBuilder::payload_without_timestamp() const {
    json j = impl_->root;
    j["all_pass"] = all_pass_;
    return j.dump(2);
}

std::string ReportBuilder::numeric_payload() const {
    json j = impl_->root;
    j["all_pass"] = all_pass_;
    j.erase("workers");
    j.erase("config_hash");  // the hash covers config.workers
    if (j.contains("config") && j["config"].is_object()) j["config"].erase("workers");
    return j.dump(2);
}

std::string ReportBuilder::json_with_timestamp() const {
    json j = impl_->root;
    j["all_pass"] = all_pass_;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
    return j.dump(2);
}

std::string ReportBuilder::metrics_csv() const {
    std::string out = "# config_hash=" + impl_->root["config_hash"].get<std::string>() +
                      " master_seed=" + std::to_string(impl_->root["master_seed"].get<uint64_t>()) +
                      " workers=" + std::to_string(impl_->root["workers"].get<int>()) + "\n";
    out += "name,estimate,se,target,z,pass\n";
    for (const MetricRow& row : rows_) {
        out += row.name;
        out += ',';
        out += format_full(row.estimate);
        out += ',';
        out += std::isnan(row.se) ? "" : format_full(row.se);
        out += ',';
        out += row.has_target ? format_full(row.target) : "";
        out += ',';
        out += (row.has_target && !std::isnan(row.z)) ? format_full(row.z) : "";
        out += ',';
        out += row.has_target ? (row.pass ? "pass" : "FAIL") : "";
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string curves_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        out += header[i];
        out += (i + 1 < header.size()) ? ',' : '\n';
    }
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out += format_full(row[i]);
            out += (i + 1 < row.size()) ? ',' : '\n';
        }
    }
    return out;
}

std::string trajectory_csv(const RegenTrajectory& traj) {
    const int d = traj.path.dim;
    std::string out = "k";
    for (int c = 0; c < d; ++c) out += ",x" + std::to_string(c + 1);
    out += ",is_regeneration_time\n";
    size_t ti = 0;
    for (int64_t k = 0; k <= traj.path.length(); ++k) {
        while (ti < traj.tau.size() && traj.tau[ti] < k) ++ti;
        const bool regen = ti < traj.tau.size() && traj.tau[ti] == k;
        out += std::to_string(k);
        const double* row = traj.path.at(k);
        for (int c = 0; c < d; ++c) {
            out += ',';
            out += format_full(row[c]);
        }
        out += regen ? ",1\n" : ",0\n";
    }
    return out;
}

}  // namespace roughwalk
