#include "cgspatial/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cgspatial/nngp.hpp"

namespace cgspatial {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
        --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& raw, std::size_t line_no,
                    const std::string& column) {
    const std::string cell = strip(raw);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
        throw std::runtime_error("read_csv: unparseable numeric '" + cell +
                                 "' in column '" + column + "' at line " +
                                 std::to_string(line_no));
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("read_csv: non-finite value in column '" +
                                 column + "' at line " +
                                 std::to_string(line_no));
    }
    return value;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (strip(header[i]) == name) return i;
    }
    throw std::runtime_error("read_csv: missing column '" + name + "'");
}

}  // namespace

SpatialDataset read_csv(const std::string& path, const CsvSchema& schema) {
    const bool geographic = schema.lon_col && schema.lat_col;
    const bool planar = schema.x_col && schema.y_col;
    if (geographic == planar) {
        throw std::runtime_error(
            "read_csv: exactly one of (lon, lat) or (x, y) column pairs must "
            "be given");
    }

    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_csv: empty file '" + path + "'");
    }
    const std::vector<std::string> header = split_csv_line(line);

    const std::string c1 = geographic ? *schema.lon_col : *schema.x_col;
    const std::string c2 = geographic ? *schema.lat_col : *schema.y_col;
    const std::size_t i1 = find_column(header, c1);
    const std::size_t i2 = find_column(header, c2);
    const std::size_t iy = find_column(header, schema.response_col);
    std::vector<std::size_t> ix;
    ix.reserve(schema.covariate_cols.size());
    for (const std::string& c : schema.covariate_cols) {
        ix.push_back(find_column(header, c));
    }

    SpatialDataset ds;
    ds.coord_x_name = geographic ? "sx" : c1;
    ds.coord_y_name = geographic ? "sy" : c2;
    ds.response_name = schema.response_col;
    ds.covariate_names = schema.covariate_cols;

    std::vector<DenseVector> x_rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const std::size_t needed =
            std::max({i1, i2, iy,
                      ix.empty() ? std::size_t{0}
                                 : *std::max_element(ix.begin(), ix.end())});
        if (fields.size() <= needed) {
            throw std::runtime_error("read_csv: too few fields at line " +
                                     std::to_string(line_no));
        }
        const double v1 = parse_double(fields[i1], line_no, c1);
        const double v2 = parse_double(fields[i2], line_no, c2);
        if (geographic) {
            try {
                ds.locations.push_back(sinusoidal_project(v1, v2));
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error("read_csv: " + std::string(e.what()) +
                                         " at line " + std::to_string(line_no));
            }
        } else {
            ds.locations.push_back({v1, v2});
        }
        ds.y.push_back(parse_double(fields[iy], line_no, schema.response_col));
        DenseVector row(ix.size());
        for (std::size_t k = 0; k < ix.size(); ++k) {
            row[k] = parse_double(fields[ix[k]], line_no,
                                  schema.covariate_cols[k]);
        }
        x_rows.push_back(std::move(row));
    }
    if (ds.y.empty()) {
        throw std::runtime_error("read_csv: no data rows in '" + path + "'");
    }

    ds.x = DenseMatrix(x_rows.size(), ix.size());
    for (std::size_t i = 0; i < x_rows.size(); ++i) {
        for (std::size_t j = 0; j < ix.size(); ++j) {
            ds.x.at(i, j) = x_rows[i][j];
        }
    }
    return ds;
}

void write_csv(const SpatialDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");

    out << ds.coord_x_name << ',' << ds.coord_y_name << ','
        << ds.response_name;
    for (const std::string& c : ds.covariate_names) out << ',' << c;
    out << '\n';

    char buf[32];
    const auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << fmt(ds.locations[i].x) << ',' << fmt(ds.locations[i].y) << ','
            << fmt(ds.y[i]);
        for (std::size_t j = 0; j < ds.x.n_cols; ++j) {
            out << ',' << fmt(ds.x.at(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

std::pair<SpatialDataset, SimulationTruth> simulate_dataset(
    std::size_t n, std::size_t p, const CovarianceKernel& kernel,
    const DenseVector& beta, double delta2, std::size_t m, RngState& rng) {
    if (n < 1) throw std::invalid_argument("simulate_dataset: n must be >= 1");
    if (p < 1) {
        throw std::invalid_argument(
            "simulate_dataset: p must be >= 1 (intercept column)");
    }
    if (beta.size() != p) {
        throw std::invalid_argument("simulate_dataset: beta length != p");
    }
    if (!(delta2 > 0.0)) {
        throw std::invalid_argument("simulate_dataset: delta2 must be > 0");
    }
    validate(kernel);

    SpatialDataset ds;
    ds.locations.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.locations[i].x = rng.uniform01();
        ds.locations[i].y = rng.uniform01();
    }

    ds.x = DenseMatrix(n, p);
    ds.covariate_names.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        ds.covariate_names[j] = "x" + std::to_string(j);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ds.x.at(i, 0) = 1.0;
        for (std::size_t j = 1; j < p; ++j) ds.x.at(i, j) = rng.normal();
    }

    const std::vector<std::size_t> order = build_order(ds.locations);
    const NeighborSets nbrs = build_neighbor_sets(ds.locations, order, m);
    const NngpFactors factors = build_nngp_factors(kernel, ds.locations, nbrs);
    const DenseVector w_ord = simulate_latent(factors, rng);
    DenseVector w(n);
    for (std::size_t i = 0; i < n; ++i) w[order[i]] = w_ord[i];

    const double noise_sd = std::sqrt(delta2 * kernel.sigma2);
    ds.y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = w[i] + noise_sd * rng.normal();
        for (std::size_t j = 0; j < p; ++j) acc += ds.x.at(i, j) * beta[j];
        ds.y[i] = acc;
    }

    SimulationTruth truth;
    truth.beta = beta;
    truth.w = std::move(w);
    truth.seed = rng.seed();
    truth.sigma2 = kernel.sigma2;
    truth.phi = kernel.phi;
    truth.delta2 = delta2;
    truth.m = m;
    return {std::move(ds), std::move(truth)};
}

}  // namespace cgspatial
