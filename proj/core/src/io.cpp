#include "nnfe/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>
#include <vector>

#include "nnfe/errors.hpp"

namespace nnfe {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool try_parse_double(const std::string& text, double* out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    std::size_t used = 0;
    try {
        *out = std::stod(t, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == t.size() && std::isfinite(*out);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

struct NumberedLine {
    std::size_t number;
    std::string text;
};

std::vector<NumberedLine> content_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::vector<NumberedLine> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string t = trim(raw);
        if (t.empty() || t[0] == '#') continue;
        lines.push_back({number, t});
    }
    return lines;
}

}  // namespace

Sample read_sample_csv(const std::string& path) {
    const std::vector<NumberedLine> lines = content_lines(path);
    if (lines.empty()) {
        throw ParseError(path + ": no data rows");
    }

    // A first line with any non-numeric field is a header.
    std::size_t first = 0;
    {
        double v;
        for (const std::string& field : split_commas(lines[0].text)) {
            if (!try_parse_double(field, &v)) {
                first = 1;
                break;
            }
        }
    }
    if (first == lines.size()) {
        throw ParseError(path + ": no data rows after the header");
    }

    const std::size_t d = split_commas(lines[first].text).size();
    std::vector<double> data;
    data.reserve((lines.size() - first) * d);
    for (std::size_t r = first; r < lines.size(); ++r) {
        const std::vector<std::string> fields = split_commas(lines[r].text);
        if (fields.size() != d) {
            throw ParseError(path + ":" + std::to_string(lines[r].number) +
                             ": expected " + std::to_string(d) + " columns, found " +
                             std::to_string(fields.size()));
        }
        for (const std::string& field : fields) {
            double v;
            if (!try_parse_double(field, &v)) {
                throw ParseError(path + ":" + std::to_string(lines[r].number) +
                                 ": '" + trim(field) + "' is not a number");
            }
            data.push_back(v);
        }
    }
    return Sample(std::move(data), lines.size() - first, d);
}

void write_sample_csv(std::ostream& out, const Sample& sample, bool header) {
    const std::size_t d = static_cast<std::size_t>(sample.dim());
    if (header) {
        for (std::size_t j = 0; j < d; ++j) {
            out << (j ? ",x" : "x") << (j + 1);
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto row = sample.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out << ',';
            out << format_full(row[j]);
        }
        out << '\n';
    }
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::map<std::string, std::string> kv;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(number) +
                             ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(path + ":" + std::to_string(number) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ParseError(path + ":" + std::to_string(number) +
                             ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace nnfe
