#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdre/data.hpp"

namespace qdre {

enum class DatasetFormat { Csv, Jsonl };

/// Picks the format from the file extension (.jsonl / .json -> JSONL, else CSV).
DatasetFormat format_from_path(const std::filesystem::path& path);

// CSV schema: header `x0,...,x{d-1},weight,label`, doubles printed with 17
// significant digits. JSONL: one `{"x":[...],"weight":w,"label":y}` per line.

void save_dataset(const Dataset& data, const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

/// Throws DataError naming the offending line on malformed input. An empty file
/// yields an empty dataset of dimension 0 and a warning. Zero-weight rows are
/// skipped with a warning.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     std::vector<std::string>* warnings = nullptr);
Dataset load_dataset(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// "%.17g" formatting.
std::string format_double(double v);

}  // namespace qdre
