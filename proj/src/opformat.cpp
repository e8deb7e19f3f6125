#include "mgritopt/opformat.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mgritopt {

namespace {

constexpr const char* kMagic = "# mgritopt-operator v1";

// Sparse column as two aligned lists: offsets with entries above exact zero.
void write_sparse(std::ostream& out, const std::string& name, const std::vector<double>& col) {
    std::vector<int> offsets;
    for (int i = 0; i < static_cast<int>(col.size()); ++i) {
        if (col[i] != 0.0) offsets.push_back(i);
    }
    if (offsets.empty()) offsets.push_back(0);
    out << "offsets_" << name;
    for (int o : offsets) out << ' ' << o;
    out << '\n';
    out << "values_" << name;
    for (int o : offsets) out << ' ' << to_hex(col[o]);
    out << '\n';
}

std::vector<std::string> tokens_after_key(const std::string& line, std::string* key) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    ss >> *key;
    while (ss >> t) toks.push_back(t);
    return toks;
}

}  // namespace

std::string to_hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double from_hex(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw std::runtime_error("malformed float literal: " + s);
    }
    return v;
}

void write_operator_file(const std::string& path, const OperatorFile& op) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kMagic << '\n';
    out << "scheme " << scheme_name(op.scheme) << '\n';
    out << "order " << op.order << '\n';
    out << "nx " << op.psi.nx() << '\n';
    out << "m " << op.m << '\n';
    out << "relax " << relax_name(op.relax) << '\n';
    out << "strategy " << op.strategy << '\n';
    out << "objective_initial " << to_hex(op.objective_initial) << '\n';
    out << "objective_final " << to_hex(op.objective_final) << '\n';
    out << "dt " << to_hex(op.psi.dt) << '\n';
    write_sparse(out, "e", op.psi.explicit_part.c);
    write_sparse(out, "i", op.psi.implicit_part.c);
    if (!out) throw std::runtime_error("write failed: " + path);
}

OperatorFile read_operator_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open operator file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw std::runtime_error("not an operator file (bad header): " + path);
    }
    std::map<std::string, std::vector<std::string>> fields;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::string key;
        fields[key] = tokens_after_key(line, &key);
        fields.erase("");
    }
    auto need = [&](const std::string& key) -> const std::vector<std::string>& {
        auto it = fields.find(key);
        if (it == fields.end()) throw std::runtime_error("operator file missing field: " + key);
        return it->second;
    };
    auto scalar = [&](const std::string& key) -> const std::string& {
        const auto& v = need(key);
        if (v.size() != 1) throw std::runtime_error("field expects one value: " + key);
        return v[0];
    };

    OperatorFile op;
    op.scheme = scheme_from_name(scalar("scheme"));
    op.order = std::stoi(scalar("order"));
    const int nx = std::stoi(scalar("nx"));
    if (nx < 1) throw std::runtime_error("operator file has invalid nx");
    op.m = std::stoi(scalar("m"));
    op.relax = relax_from_name(scalar("relax"));
    op.strategy = scalar("strategy");
    op.objective_initial = from_hex(scalar("objective_initial"));
    op.objective_final = from_hex(scalar("objective_final"));
    op.psi.dt = from_hex(scalar("dt"));

    auto load_sparse = [&](const std::string& name) -> std::vector<double> {
        const auto& offs = need("offsets_" + name);
        const auto& vals = need("values_" + name);
        if (offs.size() != vals.size()) {
            throw std::runtime_error("offsets/values length mismatch for " + name);
        }
        std::vector<double> col(static_cast<size_t>(nx), 0.0);
        for (size_t i = 0; i < offs.size(); ++i) {
            const int o = std::stoi(offs[i]);
            if (o < 0 || o >= nx) throw std::runtime_error("offset out of range in " + name);
            col[o] = from_hex(vals[i]);
        }
        return col;
    };
    op.psi.explicit_part.c = load_sparse("e");
    op.psi.implicit_part.c = load_sparse("i");
    return op;
}

}  // namespace mgritopt
