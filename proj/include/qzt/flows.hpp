#pragma once

// Flow-record tables: CSV ingestion, cleaning, quantile labels, scaling,
// stratified splitting and a seeded synthetic generator.

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qzt/error.hpp"
#include "qzt/random.hpp"
#include "qzt/textio.hpp"

namespace qzt {

inline const double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // NaN marks a missing cell
    std::vector<std::string> sources;
    std::vector<std::size_t> row_source;  // index into sources, one per row
    std::vector<int> labels;              // trailing label column, if the files had one

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }

    void check_rectangular() const {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].size() != columns.size())
                throw DataError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                " cells, expected " + std::to_string(columns.size()));
    }
};

struct CleaningReport {
    std::size_t input_rows = 0;
    std::size_t missing_imputed = 0;
    std::size_t outliers_removed = 0;
    std::size_t rows_remaining = 0;

    friend bool operator==(const CleaningReport&, const CleaningReport&) = default;
};

// Linear interpolation between order statistics: h = (n-1) p.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty column");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r[j]);
    return c;
}

inline double column_quantile(const std::vector<std::vector<double>>& rows, std::size_t j, double p) {
    auto c = column(rows, j);
    std::sort(c.begin(), c.end());
    return quantile_sorted(c, p);
}

// ---------------------------------------------------------------- CSV I/O

inline constexpr const char* kFlowsSchema = "# schema: qzt-flows v1";

namespace detail {

struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::pair<int, std::vector<std::string>>> lines;  // (line number, cells)
};

inline CsvFile read_csv(const std::string& path) {
    const std::string text = read_file(path);
    CsvFile f;
    int lineno = 0;
    bool have_header = false;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line, ',');
        for (auto& c : cells) c = std::string(trim(c));
        if (!have_header) {
            f.header = std::move(cells);
            have_header = true;
        } else {
            f.lines.emplace_back(lineno, std::move(cells));
        }
    }
    if (!have_header) throw DataError(path + ": file is empty (no header row)");
    return f;
}

inline std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> out;
    if (rc == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw DataError("glob failed for pattern '" + pattern + "'");
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline std::vector<std::string> match_files(const std::string& pattern) { return detail::expand_glob(pattern); }

// Concatenates every file matching the pattern (sorted by path). All files
// must share one header. Cells that do not parse as numbers are missing.
inline RawTable load_flows(const std::string& pattern) {
    const auto files = detail::expand_glob(pattern);
    if (files.empty()) throw DataError("no files match pattern '" + pattern + "'");
    RawTable t;
    for (const auto& path : files) {
        const auto csv = detail::read_csv(path);
        if (t.sources.empty()) {
            t.columns = csv.header;
        } else if (csv.header != t.columns) {
            throw DataError(path + ": header does not match " + t.sources.front());
        }
        const std::size_t src = t.sources.size();
        t.sources.push_back(path);
        const bool labeled = t.columns.back() == "label";
        const std::size_t nf = t.columns.size() - (labeled ? 1 : 0);
        for (const auto& [lineno, cells] : csv.lines) {
            const std::string where = path + ":" + std::to_string(lineno);
            if (cells.size() != t.columns.size())
                throw DataError(where + ": expected " + std::to_string(t.columns.size()) + " cells, got " +
                                std::to_string(cells.size()));
            std::vector<double> row(nf);
            for (std::size_t j = 0; j < nf; ++j) {
                const auto v = parse_double(cells[j]);
                row[j] = (v && std::isfinite(*v)) ? *v : kMissing;
            }
            if (labeled) {
                const auto l = parse_int(cells.back());
                if (!l || *l < 0 || *l > 2) throw DataError(where + ": label must be 0, 1 or 2");
                t.labels.push_back(static_cast<int>(*l));
            }
            t.rows.push_back(std::move(row));
            t.row_source.push_back(src);
        }
    }
    if (t.columns.back() == "label") t.columns.pop_back();
    if (t.columns.empty()) throw DataError("files matching '" + pattern + "' have no feature columns");
    if (t.rows.empty()) throw DataError("files matching '" + pattern + "' contain no data rows");
    return t;
}

inline std::string render_table_csv(const RawTable& t, std::size_t begin, std::size_t end) {
    std::string out = std::string(kFlowsSchema) + "\n";
    for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
    out += "\n";
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            if (j) out += ",";
            if (!is_missing(t.rows[i][j])) out += format_double(t.rows[i][j]);
        }
        out += "\n";
    }
    return out;
}

// --------------------------------------------------------------- cleaning

// Zero-imputes missing cells, then drops every row with a cell outside
// [Q1 - k IQR, Q3 + k IQR] of its column.
inline std::pair<RawTable, CleaningReport> clean(const RawTable& in, double iqr_factor = 1.5) {
    if (in.rows.empty()) throw DataError("cannot clean an empty table");
    if (!(iqr_factor >= 0.0)) throw ConfigError("IQR factor must be nonnegative");
    in.check_rectangular();
    CleaningReport rep;
    rep.input_rows = in.rows.size();

    auto rows = in.rows;
    for (auto& r : rows)
        for (auto& v : r)
            if (is_missing(v)) {
                v = 0.0;
                ++rep.missing_imputed;
            }

    const std::size_t nc = in.columns.size();
    std::vector<double> lo(nc), hi(nc);
    for (std::size_t j = 0; j < nc; ++j) {
        auto c = column(rows, j);
        std::sort(c.begin(), c.end());
        const double q1 = quantile_sorted(c, 0.25), q3 = quantile_sorted(c, 0.75);
        lo[j] = q1 - iqr_factor * (q3 - q1);
        hi[j] = q3 + iqr_factor * (q3 - q1);
    }

    RawTable out;
    out.columns = in.columns;
    out.sources = in.sources;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < nc && keep; ++j) keep = rows[i][j] >= lo[j] && rows[i][j] <= hi[j];
        if (!keep) {
            ++rep.outliers_removed;
            continue;
        }
        out.rows.push_back(std::move(rows[i]));
        if (i < in.row_source.size()) out.row_source.push_back(in.row_source[i]);
        if (i < in.labels.size()) out.labels.push_back(in.labels[i]);
    }
    rep.rows_remaining = out.rows.size();
    return {std::move(out), rep};
}

inline constexpr const char* kCleaningSchema = "# schema: qzt-cleaning-report v1";

inline std::string render_report(const CleaningReport& r) {
    KeyValues kv;
    kv.set("input_rows", r.input_rows);
    kv.set("missing_imputed", r.missing_imputed);
    kv.set("outliers_removed", r.outliers_removed);
    kv.set("rows_remaining", r.rows_remaining);
    return kv.render(kCleaningSchema);
}

inline CleaningReport parse_report(std::string_view text, const std::string& source) {
    const auto kv = KeyValues::parse(text, source);
    auto get = [&](const char* k) {
        const auto* v = kv.find(k);
        const auto n = v ? parse_int(*v) : std::nullopt;
        if (!n || *n < 0) throw DataError(source + ": missing or invalid " + k);
        return static_cast<std::size_t>(*n);
    };
    return {get("input_rows"), get("missing_imputed"), get("outliers_removed"), get("rows_remaining")};
}

// --------------------------------------------------------------- labeling

// Per-column quantile thresholds and min-max scaler, fitted on one table
// and reapplied unchanged to others.
struct FlowFit {
    std::vector<std::string> columns;
    std::vector<double> q95, q99, min, max;
};

struct LabeledDataset {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> raw;       // cleaned, unscaled
    std::vector<std::vector<double>> features;  // scaled to [0,1]
    std::vector<int> labels;                    // 0, 1 or 2
    FlowFit fit;
    std::size_t clamped_cells = 0;

    std::size_t size() const { return labels.size(); }
    std::vector<std::size_t> label_counts() const {
        std::vector<std::size_t> c(3, 0);
        for (int l : labels) ++c[static_cast<std::size_t>(l)];
        return c;
    }
};

inline constexpr std::size_t kMinLabelRows = 20;

inline FlowFit fit_flows(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows) {
    if (rows.size() < kMinLabelRows)
        throw DataError("labeling needs at least " + std::to_string(kMinLabelRows) + " rows, got " +
                        std::to_string(rows.size()));
    FlowFit f;
    f.columns = columns;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        auto c = column(rows, j);
        for (double v : c)
            if (is_missing(v)) throw DataError("labeling needs a cleaned table (column " + columns[j] + " has gaps)");
        std::sort(c.begin(), c.end());
        f.q95.push_back(quantile_sorted(c, 0.95));
        f.q99.push_back(quantile_sorted(c, 0.99));
        f.min.push_back(c.front());
        f.max.push_back(c.back());
    }
    return f;
}

// Labels and scales rows with an existing fit. Label 2 if any cell exceeds
// its column q99, else 1 if any exceeds q95, else 0. Scaled values outside
// [0,1] are clamped and counted.
inline LabeledDataset apply_fit(const FlowFit& fit, const std::vector<std::vector<double>>& rows) {
    LabeledDataset ds;
    ds.columns = fit.columns;
    ds.fit = fit;
    ds.raw = rows;
    const std::size_t nc = fit.columns.size();
    for (const auto& r : rows) {
        if (r.size() != nc) throw DataError("row width does not match the fitted columns");
        int lab = 0;
        std::vector<double> s(nc);
        for (std::size_t j = 0; j < nc; ++j) {
            if (is_missing(r[j])) throw DataError("cannot label a row with missing cells");
            if (r[j] > fit.q99[j]) lab = 2;
            else if (r[j] > fit.q95[j] && lab < 1) lab = 1;
            const double span = fit.max[j] - fit.min[j];
            double v = span > 0.0 ? (r[j] - fit.min[j]) / span : 0.0;
            if (v < 0.0 || v > 1.0) {
                v = std::clamp(v, 0.0, 1.0);
                ++ds.clamped_cells;
            }
            s[j] = v;
        }
        ds.features.push_back(std::move(s));
        ds.labels.push_back(lab);
    }
    return ds;
}

inline LabeledDataset label(const RawTable& table) {
    table.check_rectangular();
    return apply_fit(fit_flows(table.columns, table.rows), table.rows);
}

// Stratified by label, deterministic under the seed. Quantiles and scaler
// are refitted on the train part and reapplied to the eval part.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double eval_fraction,
                                                       std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ConfigError("eval fraction must lie in (0, 1)");
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> by_label(3);
    for (std::size_t i = 0; i < ds.size(); ++i) by_label[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    std::vector<std::size_t> tr, ev;
    for (auto& idx : by_label) {
        rng.shuffle(idx);
        const auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < idx.size(); ++k) (k < n_eval ? ev : tr).push_back(idx[k]);
    }
    std::sort(tr.begin(), tr.end());
    std::sort(ev.begin(), ev.end());
    std::vector<std::vector<double>> tr_rows, ev_rows;
    for (auto i : tr) tr_rows.push_back(ds.raw[i]);
    for (auto i : ev) ev_rows.push_back(ds.raw[i]);
    const auto fit = fit_flows(ds.columns, tr_rows);
    return {apply_fit(fit, tr_rows), apply_fit(fit, ev_rows)};
}

inline constexpr const char* kFitSchema = "# schema: qzt-flow-fit v1";

inline std::string render_fit(const FlowFit& f) {
    auto join = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
        return s;
    };
    std::string cols;
    for (std::size_t i = 0; i < f.columns.size(); ++i) cols += (i ? "," : "") + f.columns[i];
    KeyValues kv;
    kv.set("columns", cols);
    kv.set("q95", join(f.q95));
    kv.set("q99", join(f.q99));
    kv.set("min", join(f.min));
    kv.set("max", join(f.max));
    return kv.render(kFitSchema);
}

inline FlowFit parse_fit(std::string_view text, const std::string& source) {
    const auto kv = KeyValues::parse(text, source);
    auto get = [&](const char* k) -> const std::string& {
        const auto* v = kv.find(k);
        if (!v) throw DataError(source + ": missing key " + k);
        return *v;
    };
    FlowFit f;
    f.columns = split(get("columns"), ',');
    auto nums = [&](const char* k) {
        std::vector<double> out;
        for (const auto& t : split(get(k), ',')) {
            const auto v = parse_double(t);
            if (!v) throw DataError(source + ": bad number in " + k);
            out.push_back(*v);
        }
        if (out.size() != f.columns.size()) throw DataError(source + ": " + k + " has the wrong length");
        return out;
    };
    f.q95 = nums("q95");
    f.q99 = nums("q99");
    f.min = nums("min");
    f.max = nums("max");
    return f;
}

inline constexpr const char* kDatasetSchema = "# schema: qzt-dataset v1";

// Scaled features followed by an integer label column.
inline std::string render_dataset_csv(const LabeledDataset& ds) {
    std::string out = std::string(kDatasetSchema) + "\n";
    for (const auto& c : ds.columns) out += c + ",";
    out += "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features[i]) out += format_double(v) + ",";
        out += std::to_string(ds.labels[i]) + "\n";
    }
    return out;
}

// Reads back features and labels (the raw values are not stored).
inline LabeledDataset parse_dataset_csv(const std::string& path) {
    const std::string text = read_file(path);
    if (text.rfind(kDatasetSchema, 0) != 0) throw DataError(path + ": missing or unsupported schema line");
    const auto csv = detail::read_csv(path);
    if (csv.header.size() < 2 || csv.header.back() != "label") throw DataError(path + ": last column must be 'label'");
    LabeledDataset ds;
    ds.columns.assign(csv.header.begin(), csv.header.end() - 1);
    for (const auto& [lineno, cells] : csv.lines) {
        if (cells.size() != csv.header.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": wrong number of cells");
        std::vector<double> row;
        for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
            const auto v = parse_double(cells[j]);
            if (!v || *v < 0.0 || *v > 1.0) throw DataError(path + ":" + std::to_string(lineno) + ": bad feature value");
            row.push_back(*v);
        }
        const auto l = parse_int(cells.back());
        if (!l || *l < 0 || *l > 2) throw DataError(path + ":" + std::to_string(lineno) + ": label must be 0, 1 or 2");
        ds.features.push_back(std::move(row));
        ds.labels.push_back(static_cast<int>(*l));
    }
    if (ds.features.empty()) throw DataError(path + ": no rows");
    return ds;
}

// -------------------------------------------------------------- generator

// Rows share one latent intensity u, scaled per column:
// value_j = scale_j * (u + jitter), floored at 0. Column scales are
// log-normal. Base rows draw u ~ U[0, 1]; attack rows draw u from bands
// above it, so the quantile labels recover the planted classes when the
// attack rates sit at the 95th/99th percentile boundaries. Column scales
// come from scale_seed so tables drawn with different row seeds describe
// the same network. Planted outlier rows put one cell far beyond the upper
// IQR fence; planted missing cells are blanked in base rows only, where the
// imputed zero cannot move a quantile boundary.
struct SynthProfile {
    double mid_rate = 0.04;   // label-1 band
    double high_rate = 0.01;  // label-2 band
    std::size_t missing_cells = 0;
    std::size_t outlier_rows = 0;
    double jitter = 0.001;
    double mid_lo = 1.10, mid_hi = 1.20;
    double high_lo = 1.30, high_hi = 1.45;
    double outlier_lo = 6.0, outlier_hi = 8.0;
    double scale_log_mean = 3.0, scale_log_sd = 1.5;
    std::uint64_t scale_seed = 13;

    void validate() const {
        if (!(mid_rate >= 0 && high_rate >= 0 && mid_rate + high_rate <= 1.0))
            throw ConfigError("attack rates must be nonnegative and sum to at most 1");
        if (!(jitter >= 0 && mid_lo <= mid_hi && high_lo <= high_hi && outlier_lo <= outlier_hi))
            throw ConfigError("synthetic profile bands are inconsistent");
        if (!(scale_log_sd >= 0)) throw ConfigError("scale spread must be nonnegative");
    }
};

inline std::vector<std::string> default_flow_columns(std::size_t n_cols) {
    static const char* names[] = {"n_flows",         "n_packets",           "n_bytes",
                                  "n_dest_ip",       "n_dest_asn",          "n_dest_ports",
                                  "tcp_udp_ratio_packets", "tcp_udp_ratio_bytes", "dir_ratio_packets",
                                  "dir_ratio_bytes", "avg_duration",        "avg_ttl",
                                  "sum_n_dest_ports"};
    std::vector<std::string> out;
    for (std::size_t j = 0; j < n_cols; ++j)
        out.push_back(n_cols == 13 ? names[j] : "f" + std::to_string(j + 1));
    return out;
}

// n_rows counts raw rows, planted outliers included.
inline RawTable synth_generate(std::size_t n_rows, std::size_t n_cols, std::uint64_t seed, const SynthProfile& p,
                               std::vector<int>* planted_class = nullptr) {
    if (n_rows < 100) throw ConfigError("synthetic table needs at least 100 rows");
    if (n_cols < 2) throw ConfigError("synthetic table needs at least 2 columns");
    p.validate();
    if (p.outlier_rows >= n_rows) throw ConfigError("more planted outliers than rows");
    const std::size_t n_clean = n_rows - p.outlier_rows;

    Rng scale_rng(p.scale_seed);
    std::vector<double> scale(n_cols);
    for (auto& s : scale) s = std::exp(p.scale_log_mean + p.scale_log_sd * scale_rng.normal());

    Rng rng(seed);

    const auto n_mid = static_cast<std::size_t>(std::llround(p.mid_rate * static_cast<double>(n_clean)));
    const auto n_high = static_cast<std::size_t>(std::llround(p.high_rate * static_cast<double>(n_clean)));
    if (n_mid + n_high > n_clean) throw ConfigError("attack rates exceed the row count");
    if (p.missing_cells > (n_clean - n_mid - n_high) * n_cols)
        throw ConfigError("more planted missing cells than base cells");
    std::vector<int> cls(n_clean, 0);
    std::fill(cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(n_mid), 1);
    std::fill(cls.begin() + static_cast<std::ptrdiff_t>(n_mid),
              cls.begin() + static_cast<std::ptrdiff_t>(n_mid + n_high), 2);
    rng.shuffle(cls);

    // -1 marks a planted outlier row.
    std::vector<int> kind = cls;
    for (std::size_t k = 0; k < p.outlier_rows; ++k) {
        const auto pos = rng.below(kind.size() + 1);
        kind.insert(kind.begin() + static_cast<std::ptrdiff_t>(pos), -1);
    }

    RawTable t;
    t.columns = default_flow_columns(n_cols);
    t.sources = {"synthetic:seed=" + std::to_string(seed)};
    for (int k : kind) {
        double u = 0.0;
        switch (k) {
            case 1: u = rng.uniform(p.mid_lo, p.mid_hi); break;
            case 2: u = rng.uniform(p.high_lo, p.high_hi); break;
            default: u = rng.uniform(); break;
        }
        std::vector<double> row(n_cols);
        for (std::size_t j = 0; j < n_cols; ++j)
            row[j] = std::max(0.0, scale[j] * (u + rng.uniform(-p.jitter, p.jitter)));
        if (k == -1) {
            const auto j = rng.below(n_cols);
            row[j] = scale[j] * rng.uniform(p.outlier_lo, p.outlier_hi);
        }
        t.rows.push_back(std::move(row));
        t.row_source.push_back(0);
    }

    std::set<std::pair<std::size_t, std::size_t>> blanks;
    while (blanks.size() < p.missing_cells) {
        const auto i = rng.below(t.rows.size());
        if (kind[i] != 0) continue;
        blanks.insert({i, rng.below(n_cols)});
    }
    for (const auto& [i, j] : blanks) t.rows[i][j] = kMissing;

    if (planted_class) *planted_class = kind;
    return t;
}

}  // namespace qzt
