#include "rlp/lp_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rlp/rng.hpp"

namespace rlp {

using nlohmann::json;

namespace {

int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw ParseError("field '" + field + "': " + why);
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) bad(field, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) bad(field, "not finite");
    return x;
}

Index dim(const json& doc, const char* field) {
    if (!doc.contains(field)) bad(field, "missing");
    const json& v = doc[field];
    if (!v.is_number_integer() || v.get<long long>() < 1) bad(field, "expected a positive integer");
    return Index(v.get<long long>());
}

Vec vec(const json& doc, const char* field, Index len) {
    if (!doc.contains(field)) bad(field, "missing");
    const json& v = doc[field];
    if (!v.is_array()) bad(field, "expected an array");
    if (Index(v.size()) != len) bad(field, "expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
    Vec out(len);
    for (Index i = 0; i < len; ++i) out[i] = number(v[i], std::string(field) + "[" + std::to_string(i) + "]");
    return out;
}

}  // namespace

LpProblem parse_lp(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("line 1: top level must be an object");

    LpProblem lp;
    Index n = dim(doc, "n"), d = dim(doc, "d");
    if (!doc.contains("A")) bad("A", "missing");
    const json& a = doc["A"];
    if (!a.is_array()) bad("A", "expected an array");
    lp.A.resize(n, d);
    if (!a.empty() && a[0].is_array()) {
        if (Index(a.size()) != n) bad("A", "expected " + std::to_string(n) + " rows");
        for (Index i = 0; i < n; ++i) {
            if (!a[i].is_array() || Index(a[i].size()) != d)
                bad("A[" + std::to_string(i) + "]", "expected " + std::to_string(d) + " entries");
            for (Index j = 0; j < d; ++j)
                lp.A(i, j) = number(a[i][j], "A[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        }
    } else {
        if (Index(a.size()) != n * d) bad("A", "expected n*d = " + std::to_string(n * d) + " entries");
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j) lp.A(i, j) = number(a[i * d + j], "A[" + std::to_string(i * d + j) + "]");
    }
    lp.b = vec(doc, "b", d);
    lp.c = vec(doc, "c", n);
    for (const char* f : {"R", "L"}) {
        if (!doc.contains(f) || doc[f].is_null()) continue;
        double v = number(doc[f], f);
        if (!(v > 0)) bad(f, "must be positive");
        (f[0] == 'R' ? lp.R : lp.L) = v;
    }
    return lp;
}

LpProblem read_lp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_lp(ss.str());
}

std::string dump_lp(const LpProblem& lp) {
    json doc;
    doc["n"] = lp.n();
    doc["d"] = lp.d();
    json a = json::array();
    for (Index i = 0; i < lp.n(); ++i)
        for (Index j = 0; j < lp.d(); ++j) a.push_back(lp.A(i, j));
    doc["A"] = std::move(a);
    doc["b"] = std::vector<double>(lp.b.data(), lp.b.data() + lp.b.size());
    doc["c"] = std::vector<double>(lp.c.data(), lp.c.data() + lp.c.size());
    if (lp.R) doc["R"] = *lp.R;
    if (lp.L) doc["L"] = *lp.L;
    return doc.dump(1);
}

void write_lp_file(const std::string& path, const LpProblem& lp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << dump_lp(lp) << '\n';
}

LpProblem generate_lp(Index n, Index d, std::uint64_t seed) {
    if (d < 1 || n < d) throw std::invalid_argument("generate_lp: need n >= d >= 1");
    Rng rng(seed);
    LpProblem lp;
    lp.A = rng.normal_mat(n, d);
    for (Index i = 0; i < n; ++i) lp.A(i, 0) = 0.5 + std::abs(lp.A(i, 0));
    lp.b = lp.A.transpose() * Vec::Ones(n);
    lp.c = rng.normal_vec(n);
    lp.R = lp.b[0] / lp.A.col(0).minCoeff();
    lp.L = lp.c.norm();
    return lp;
}

}  // namespace rlp
