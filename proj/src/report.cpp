#include "contact/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace contact {

std::string format_double(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw std::logic_error("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                               std::to_string(header.size()));
    rows.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos)
        return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out += ',';
        out += quote(cells[i]);
    }
    out += '\n';
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f << text;
    if (!f)
        throw std::runtime_error("write failed for " + p.string());
}

} // namespace

std::string CsvTable::to_string() const {
    std::string out;
    append_line(out, header);
    for (const auto& r : rows)
        append_line(out, r);
    return out;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json to_json(const RunMetadata& m) {
    return nlohmann::json{{"command", m.command},         {"config", m.config_path},
                          {"seed", m.seed},               {"threads", m.threads},
                          {"unsupported", m.unsupported}, {"started_utc", m.started_utc},
                          {"finished_utc", m.finished_utc}};
}

ReportWriter::ReportWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ReportWriter::write(const std::string& stem, const CsvTable& table) const {
    const auto p = dir_ / (stem + ".csv");
    write_file(p, table.to_string());
    return p;
}

std::filesystem::path ReportWriter::write(const std::string& stem, const nlohmann::json& body) const {
    const auto p = dir_ / (stem + ".json");
    write_file(p, body.dump(2) + "\n");
    return p;
}

std::filesystem::path ReportWriter::write_metadata(const RunMetadata& m) const {
    const auto p = dir_ / (m.command + ".meta.json");
    write_file(p, to_json(m).dump(2) + "\n");
    return p;
}

} // namespace contact
