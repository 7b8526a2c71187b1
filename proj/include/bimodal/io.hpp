#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "bimodal/errors.hpp"
#include "bimodal/instance.hpp"

namespace bimodal {

// shortest round-trip decimal: 17 significant digits
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw parse_error(line, "malformed number '" + std::string(tok) + "'");
    if (!std::isfinite(v)) throw parse_error(line, "non-finite number");
    return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline Vec parse_floats(std::string_view s, std::size_t expect, std::size_t line) {
    const auto toks = split_ws(s);
    if (toks.size() != expect)
        throw parse_error(line, "expected " + std::to_string(expect) + " numbers, got " +
                                    std::to_string(toks.size()));
    Vec v(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) v[i] = parse_double(toks[i], line);
    return v;
}

// key=value tokens in fixed order
inline std::string expect_kv(std::string_view tok, std::string_view key, std::size_t line) {
    if (tok.substr(0, key.size()) != key || tok.size() <= key.size() || tok[key.size()] != '=')
        throw parse_error(line, "expected " + std::string(key) + "=<value>");
    return std::string(tok.substr(key.size() + 1));
}

struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 0;

    bool next(std::string_view& out) {
        if (pos >= text.size()) return false;
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            out = text.substr(pos);
            pos = text.size();
        } else {
            out = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        ++line;
        return true;
    }
};

}  // namespace detail

inline std::string serialize_dataset(const Dataset& d) {
    std::string out = "BIMODAL-HS v1\n";
    out += "mode=" + std::string(mode_name(d.mode)) + " n=" + std::to_string(d.n_base) +
           " ambient=" + std::to_string(d.ambient) + " m=" + std::to_string(d.m()) +
           " seed=" + std::to_string(d.seed) + "\n";
    for (const auto& row : d.rows) {
        for (std::size_t i = 0; i < row.x.size(); ++i) {
            if (i) out += ' ';
            out += fmt17(row.x[i]);
        }
        out += " | ";
        for (std::size_t i = 0; i < row.y.size(); ++i) {
            if (i) out += ' ';
            out += fmt17(row.y[i]);
        }
        out += " | ";
        out += row.z > 0 ? "+1" : "-1";
        out += '\n';
    }
    return out;
}

inline Dataset parse_dataset(std::string_view text) {
    detail::LineReader rd{text};
    std::string_view line;

    if (!rd.next(line) || line != "BIMODAL-HS v1")
        throw parse_error(1, "expected header 'BIMODAL-HS v1'");

    if (!rd.next(line)) throw parse_error(2, "missing parameter line");
    const auto toks = detail::split_ws(line);
    if (toks.size() != 5) throw parse_error(2, "expected 5 key=value fields");

    Dataset d;
    const std::string mode = detail::expect_kv(toks[0], "mode", 2);
    if (mode == "proper")
        d.mode = Mode::proper;
    else if (mode == "improper")
        d.mode = Mode::improper;
    else
        throw parse_error(2, "mode must be proper or improper");
    d.n_base = std::stoull(detail::expect_kv(toks[1], "n", 2));
    d.ambient = std::stoull(detail::expect_kv(toks[2], "ambient", 2));
    const std::size_t m = std::stoull(detail::expect_kv(toks[3], "m", 2));
    d.seed = std::stoull(detail::expect_kv(toks[4], "seed", 2));
    if (d.n_base == 0 || d.ambient == 0) throw parse_error(2, "n and ambient must be positive");

    for (std::size_t i = 0; i < m; ++i) {
        if (!rd.next(line)) throw parse_error(rd.line + 1, "missing data row " + std::to_string(i + 1));
        // x | y | z
        const auto bar1 = line.find('|');
        const auto bar2 = (bar1 == std::string_view::npos) ? bar1 : line.find('|', bar1 + 1);
        if (bar1 == std::string_view::npos || bar2 == std::string_view::npos)
            throw parse_error(rd.line, "expected two '|' delimiters");
        Row row;
        row.x = detail::parse_floats(line.substr(0, bar1), d.ambient, rd.line);
        row.y = detail::parse_floats(line.substr(bar1 + 1, bar2 - bar1 - 1), d.ambient, rd.line);
        const auto ztoks = detail::split_ws(line.substr(bar2 + 1));
        if (ztoks.size() != 1 || (ztoks[0] != "+1" && ztoks[0] != "-1"))
            throw parse_error(rd.line, "label must be +1 or -1");
        row.z = ztoks[0] == "+1" ? +1 : -1;
        d.rows.push_back(std::move(row));
    }
    if (rd.next(line) && !line.empty())
        throw parse_error(rd.line, "unexpected trailing content");
    return d;
}

inline std::string serialize_witness(const Witness& w) {
    const std::size_t d = w.params.ambient_dim();
    std::string out = "WITNESS v1\n";
    out += "mode=" + std::string(mode_name(w.params.mode)) +
           " n=" + std::to_string(w.params.base_dim()) +
           " k=" + std::to_string(w.params.directions.size()) + "\n";
    for (std::size_t j = 0; j < w.params.directions.size(); ++j) {
        out += "r " + std::to_string(j + 1) + ":";
        for (const double v : w.params.directions[j].entries()) out += ' ' + fmt17(v);
        out += '\n';
        out += "c " + std::to_string(j + 1) + ": " + fmt17(w.params.thresholds[j]) + '\n';
    }
    out += "Q:\n";
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out += ' ';
            out += fmt17(w.Q(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Witness parse_witness(std::string_view text) {
    detail::LineReader rd{text};
    std::string_view line;

    if (!rd.next(line) || line != "WITNESS v1")
        throw parse_error(1, "expected header 'WITNESS v1'");
    if (!rd.next(line)) throw parse_error(2, "missing parameter line");
    const auto toks = detail::split_ws(line);
    if (toks.size() != 3) throw parse_error(2, "expected 3 key=value fields");

    InstanceParams p;
    const std::string mode = detail::expect_kv(toks[0], "mode", 2);
    if (mode == "proper")
        p.mode = Mode::proper;
    else if (mode == "improper")
        p.mode = Mode::improper;
    else
        throw parse_error(2, "mode must be proper or improper");
    const std::size_t n_base = std::stoull(detail::expect_kv(toks[1], "n", 2));
    const std::size_t k = std::stoull(detail::expect_kv(toks[2], "k", 2));
    p.n = (p.mode == Mode::proper) ? n_base : n_base * n_base;

    for (std::size_t j = 0; j < k; ++j) {
        if (!rd.next(line)) throw parse_error(rd.line + 1, "missing direction row");
        const std::string rprefix = "r " + std::to_string(j + 1) + ":";
        if (line.substr(0, rprefix.size()) != rprefix)
            throw parse_error(rd.line, "expected '" + rprefix + "'");
        Vec dir = detail::parse_floats(line.substr(rprefix.size()), n_base, rd.line);
        if (std::abs(norm2(dir) - 1.0) > 1e-9)
            throw parse_error(rd.line, "direction is not unit length");
        p.directions.push_back(UnitVector(std::move(dir)));

        if (!rd.next(line)) throw parse_error(rd.line + 1, "missing threshold row");
        const std::string cprefix = "c " + std::to_string(j + 1) + ":";
        if (line.substr(0, cprefix.size()) != cprefix)
            throw parse_error(rd.line, "expected '" + cprefix + "'");
        const auto ctoks = detail::split_ws(line.substr(cprefix.size()));
        if (ctoks.size() != 1) throw parse_error(rd.line, "expected one threshold value");
        p.thresholds.push_back(detail::parse_double(ctoks[0], rd.line));
    }

    if (!rd.next(line) || line != "Q:") throw parse_error(rd.line, "expected 'Q:'");
    const std::size_t d = p.ambient_dim();
    Matrix q(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!rd.next(line)) throw parse_error(rd.line + 1, "missing Q row " + std::to_string(i + 1));
        const Vec row = detail::parse_floats(line, d, rd.line);
        for (std::size_t j = 0; j < d; ++j) q(i, j) = row[j];
    }
    p.validate();
    return Witness{std::move(p), std::move(q)};
}

// ---------------------------------------------------------------------------
// Verification: consistency checks of a dataset against its witness.

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

inline std::vector<CheckResult> run_verification(const Dataset& d, const Witness& w) {
    std::vector<CheckResult> out;

    // 1. header consistency
    {
        const bool ok = d.mode == w.params.mode && d.n_base == w.params.base_dim() &&
                        d.ambient == w.params.ambient_dim();
        out.push_back({"header-consistency", ok, ok ? "" : "dataset/witness shape mismatch"});
    }
    // 2. Q orthogonality
    {
        const double defect = w.Q.orthogonality_defect();
        out.push_back({"Q-orthogonality", defect <= 1e-9,
                       "max |Q^T Q - I| = " + fmt17(defect)});
    }
    // 3. fingerprint fixed point: Q (r_j, 0) = (r_j, 0) in proper mode;
    //    improper mode checks the identity block on the padded directions too
    {
        double worst = 0.0;
        for (const auto& r : w.params.directions) {
            const UnitVector padded = pad_direction(r, w.params.ambient_dim());
            const Vec image = w.Q.apply(padded);
            for (std::size_t i = 0; i < image.size(); ++i)
                worst = std::max(worst, std::abs(image[i] - padded[i]));
        }
        out.push_back({"fingerprint-fixed-point", worst <= 1e-9,
                       "max |Q r_hat - r_hat| = " + fmt17(worst)});
    }
    // 4. y = Qx on every row
    {
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            const Vec image = w.Q.apply(d.rows[i].x);
            double err = 0.0;
            for (std::size_t j = 0; j < image.size(); ++j)
                err = std::max(err, std::abs(image[j] - d.rows[i].y[j]));
            if (err > 1e-8) {
                ok = false;
                detail = "y != Qx at row " + std::to_string(i + 1) + " (err " + fmt17(err) + ")";
                break;
            }
        }
        out.push_back({"modality-consistency", ok, detail});
    }
    // 5. realizability: the planted hypothesis classifies every row correctly
    {
        const Hypothesis planted = w.hypothesis();
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            if (planted.predict(d.rows[i].x) != d.rows[i].z) {
                ok = false;
                detail = "realizability check failed at row " + std::to_string(i + 1);
                break;
            }
        }
        out.push_back({"realizability", ok, detail});
    }
    return out;
}

}  // namespace bimodal
