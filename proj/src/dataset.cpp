#include "affem/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "affem/error.hpp"

namespace affem {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view text, const std::filesystem::path& path, std::size_t line) {
    text = trim(text);
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorCode::ParseError,
                    path.string() + ":" + std::to_string(line) + ": cannot parse '" + std::string(text) + "'");
    return value;
}

void append_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

void append_number(std::string& out, int v) { out += std::to_string(v); }

template <class T>
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header, const RowTable<T>& data) {
    if (header.size() != data.columns())
        throw Error(ErrorCode::InvalidArgument, "header has " + std::to_string(header.size()) + " names for " +
                                                    std::to_string(data.columns()) + " columns");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) line += (i ? "," : "") + header[i];
    out << line << '\n';
    for (std::size_t k = 0; k < data.size(); ++k) {
        line.clear();
        const auto row = data.row(k);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += ',';
            append_number(line, row[i]);
        }
        out << line << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

template <class T>
RowTable<T> read_table(const std::filesystem::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
    const auto names = split(line);
    std::vector<std::size_t> column_of(header.size(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j)
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(names[j]) == header[i]) column_of[i] = j;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (column_of[i] == names.size())
            throw Error(ErrorCode::ParseError, path.string() + ": missing column '" + header[i] + "'");

    RowTable<T> table(header.size());
    std::vector<T> row(header.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != names.size())
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                                   std::to_string(names.size()) + " fields");
        for (std::size_t i = 0; i < header.size(); ++i) row[i] = parse_number<T>(fields[column_of[i]], path, line_no);
        table.push_back(row);
    }
    return table;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Dataset& data) {
    write_table(path, header, data);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const DiscretizedDataset& data) {
    write_table(path, header, data);
}

Dataset read_dataset_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
    return read_table<double>(path, header);
}

DiscretizedDataset read_discretized_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
    return read_table<int>(path, header);
}

}  // namespace affem
