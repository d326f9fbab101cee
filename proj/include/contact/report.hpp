#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace contact {

// Shortest round-trip decimal form, identical across runs and platforms that
// share the IEEE format; "nan" and "inf" spelled out.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws std::logic_error if the row width differs from the header.
    void add(std::vector<std::string> row);
    // RFC 4180 quoting for cells holding a comma, quote or newline.
    std::string to_string() const;
};

// Everything about a run that is not a result. Only the timestamps vary
// between identical runs, and they are written to the metadata file alone.
struct RunMetadata {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 0;
    bool unsupported = false; // --force unlocked z >= z0
    std::string started_utc;
    std::string finished_utc;
};

std::string utc_now();

nlohmann::json to_json(const RunMetadata& m);

// Writes <dir>/<command>.csv, <dir>/<command>.json and <dir>/<command>.meta.json.
// The CSV and JSON bodies carry no timestamps; the JSON body records seed and
// the unsupported flag so results stay self-describing.
class ReportWriter {
public:
    explicit ReportWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path write(const std::string& stem, const CsvTable& table) const;
    std::filesystem::path write(const std::string& stem, const nlohmann::json& body) const;
    std::filesystem::path write_metadata(const RunMetadata& m) const;

private:
    std::filesystem::path dir_;
};

} // namespace contact
