#include "araudit/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "araudit/error.hpp"

namespace araudit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view s, std::size_t line_no) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IoError(fmt::format("line {}: cannot parse '{}' as a real", line_no, s));
    }
    return v;
}

Label parse_label(std::string_view s, std::size_t line_no) {
    s = trim(s);
    if (s == "+1" || s == "1") return Label::Positive;
    if (s == "-1") return Label::Negative;
    throw IoError(fmt::format("line {}: label must be +1 or -1, got '{}'", line_no, s));
}

} // namespace

void write_dataset_csv(std::ostream& out, const LabeledDataset& dataset) {
    out << "user_id,label";
    for (std::size_t j = 0; j < dataset.feature_count(); ++j) fmt::print(out, ",f{}", j);
    out << '\n';
    fmt::memory_buffer buf;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{},{}", dataset.user(i),
                       dataset.label(i) == Label::Positive ? "+1" : "-1");
        for (double v : dataset.row(i)) fmt::format_to(std::back_inserter(buf), ",{:.17g}", v);
        buf.push_back('\n');
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    write_dataset_csv(out, dataset);
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

LabeledDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset file is empty");
    const auto header = split_fields(trim(line));
    if (header.size() < 3 || trim(header[0]) != "user_id" || trim(header[1]) != "label") {
        throw IoError("dataset header must start with user_id,label and name at least one feature");
    }
    const std::size_t n = header.size() - 2;

    LabeledDataset ds(n);
    std::vector<double> row(n);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(trim(line));
        if (fields.size() != n + 2) {
            throw IoError(fmt::format("line {}: expected {} fields, found {}", line_no, n + 2,
                                      fields.size()));
        }
        const Label label = parse_label(fields[1], line_no);
        for (std::size_t j = 0; j < n; ++j) row[j] = parse_real(fields[j + 2], line_no);
        ds.add(row, label, std::string(trim(fields[0])));
    }
    return ds;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return read_dataset_csv(in);
}

} // namespace araudit
