#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace affem {

/// K experiments × N nodes, stored row-major.
template <class T>
class RowTable {
public:
    RowTable() = default;
    explicit RowTable(std::size_t columns) : columns_(columns) {}
    RowTable(std::size_t columns, std::vector<T> values) : columns_(columns), values_(std::move(values)) {}

    std::size_t columns() const { return columns_; }
    std::size_t size() const { return columns_ == 0 ? 0 : values_.size() / columns_; }
    bool empty() const { return values_.empty(); }

    std::span<const T> row(std::size_t k) const { return {values_.data() + k * columns_, columns_}; }
    std::span<T> row(std::size_t k) { return {values_.data() + k * columns_, columns_}; }
    const T& at(std::size_t k, std::size_t i) const { return values_[k * columns_ + i]; }

    void push_back(std::span<const T> row) { values_.insert(values_.end(), row.begin(), row.end()); }
    void reserve(std::size_t rows) { values_.reserve(rows * columns_); }

    const std::vector<T>& values() const { return values_; }

    bool operator==(const RowTable&) const = default;

private:
    std::size_t columns_ = 0;
    std::vector<T> values_;
};

/// Continuous sensor readings, one row per experiment.
using Dataset = RowTable<double>;

/// Discrete node values, one row per experiment.
using DiscretizedDataset = RowTable<int>;

/// Comma-separated text with a header row of node names.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Dataset& data);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const DiscretizedDataset& data);

/// Reads a table written by write_csv. Columns are matched to `header` by
/// name, so column order in the file may differ. Throws Error{IoError | ParseError}.
Dataset read_dataset_csv(const std::filesystem::path& path, const std::vector<std::string>& header);
DiscretizedDataset read_discretized_csv(const std::filesystem::path& path,
                                        const std::vector<std::string>& header);

}  // namespace affem
