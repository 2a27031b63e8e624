#include "qdre/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "qdre/errors.hpp"

namespace qdre {

namespace fs = std::filesystem;

DatasetFormat format_from_path(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json") return DatasetFormat::Jsonl;
    return DatasetFormat::Csv;
}

std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

void save_dataset(const Dataset& data, const fs::path& path, DatasetFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    if (format == DatasetFormat::Csv) {
        for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
        out << "weight,label\n";
        for (const auto& s : data) {
            for (double v : s.features) out << format_double(v) << ',';
            out << format_double(s.weight) << ',' << s.label << '\n';
        }
    } else {
        for (const auto& s : data) {
            nlohmann::json row = {{"x", s.features}, {"weight", s.weight}, {"label", s.label}};
            out << row.dump() << '\n';
        }
    }
    if (!out) throw DataError("write failed for " + path.string());
}

void save_dataset(const Dataset& data, const fs::path& path) {
    save_dataset(data, path, format_from_path(path));
}

namespace {

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
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

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty();
}

bool parse_label(std::string_view text, int& out) {
    text = trim(text);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty() &&
           (out == 0 || out == 1);
}

void add_row(Dataset& data, WeightedSample sample, const fs::path& path, std::size_t line,
             std::vector<std::string>* warnings) {
    try {
        if (!data.add(std::move(sample)) && warnings) {
            warnings->push_back(path.string() + ":" + std::to_string(line) + ": zero-weight row skipped");
        }
    } catch (const DataError& e) {
        fail(path, line, e.what());
    }
}

Dataset load_csv(const fs::path& path, std::istream& in, std::vector<std::string>* warnings) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) {
        if (warnings) warnings->push_back(path.string() + ": empty file, dimension inferred as 0");
        return Dataset(0);
    }
    const auto header = split_fields(line);
    if (header.size() < 2 || trim(header[header.size() - 2]) != "weight" || trim(header.back()) != "label") {
        fail(path, lineno, "header must be x0,...,x{d-1},weight,label");
    }
    const std::size_t d = header.size() - 2;
    for (std::size_t j = 0; j < d; ++j) {
        if (trim(header[j]) != "x" + std::to_string(j)) {
            fail(path, lineno, "expected column x" + std::to_string(j) + " in header");
        }
    }
    Dataset data(d);
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != d + 2) {
            fail(path, lineno, "expected " + std::to_string(d + 2) + " fields, found " + std::to_string(fields.size()));
        }
        WeightedSample s;
        s.features.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            if (!parse_double(fields[j], s.features[j])) fail(path, lineno, "non-numeric feature x" + std::to_string(j));
        }
        if (!parse_double(fields[d], s.weight)) fail(path, lineno, "non-numeric weight");
        if (!parse_label(fields[d + 1], s.label)) fail(path, lineno, "label must be 0 or 1");
        add_row(data, std::move(s), path, lineno, warnings);
    }
    return data;
}

Dataset load_jsonl(const fs::path& path, std::istream& in, std::vector<std::string>* warnings) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<Dataset> data;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            fail(path, lineno, "invalid JSON");
        }
        if (!row.is_object() || !row.contains("x") || !row["x"].is_array()) fail(path, lineno, "missing array field x");
        if (!row.contains("weight") || !row["weight"].is_number()) fail(path, lineno, "non-numeric weight");
        if (!row.contains("label") || !row["label"].is_number_integer()) fail(path, lineno, "label must be 0 or 1");
        WeightedSample s;
        for (const auto& v : row["x"]) {
            if (!v.is_number()) fail(path, lineno, "non-numeric feature");
            s.features.push_back(v.get<double>());
        }
        s.weight = row["weight"].get<double>();
        s.label = row["label"].get<int>();
        if (!data) data.emplace(s.features.size());
        if (s.features.size() != data->dim()) {
            fail(path, lineno, "dimension mismatch: expected " + std::to_string(data->dim()) + " features");
        }
        add_row(*data, std::move(s), path, lineno, warnings);
    }
    if (!data) {
        if (warnings) warnings->push_back(path.string() + ": empty file, dimension inferred as 0");
        return Dataset(0);
    }
    return std::move(*data);
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return format == DatasetFormat::Csv ? load_csv(path, in, warnings) : load_jsonl(path, in, warnings);
}

Dataset load_dataset(const fs::path& path, std::vector<std::string>* warnings) {
    return load_dataset(path, format_from_path(path), warnings);
}

}  // namespace qdre
