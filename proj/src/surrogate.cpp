#include "ledmaint/surrogate.hpp"

#include "ledmaint/csv.hpp"
#include "ledmaint/degradation.hpp"
#include "ledmaint/rng.hpp"

#include <boost/crc.hpp>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ledmaint {

void Layout::validate() const {
    if (luminaires.empty() || grid.empty()) {
        throw DomainError("layout needs at least one luminaire and one grid point");
    }
    if (!(ambient_floor >= 0.0) || !std::isfinite(ambient_floor)) {
        throw DomainError("layout ambient_floor must be finite and >= 0");
    }
    for (const auto& l : luminaires) {
        if (!(l.z > h_wp)) {
            throw DomainError("luminaire " + std::to_string(l.id) + " is not above the working plane");
        }
        if (!(l.intensity >= 0.0) || !std::isfinite(l.intensity)) {
            throw DomainError("luminaire " + std::to_string(l.id) + " has an invalid intensity");
        }
    }
}

Eigen::MatrixXd influence_matrix(const Layout& layout) {
    layout.validate();
    Eigen::MatrixXd g(layout.N(), layout.J());
    for (std::size_t j = 0; j < layout.J(); ++j) {
        const auto& l = layout.luminaires[j];
        const double h = l.z - layout.h_wp;
        for (std::size_t i = 0; i < layout.N(); ++i) {
            const double dx = layout.grid[i].x - l.x;
            const double dy = layout.grid[i].y - l.y;
            const double d = std::sqrt(dx * dx + dy * dy + h * h);
            g(i, j) = l.intensity * h / (d * d * d);
        }
    }
    return g;
}

Eigen::VectorXd analytic_oracle(const Layout& layout, const Eigen::VectorXd& q) {
    if (static_cast<std::size_t>(q.size()) != layout.J()) {
        throw DomainError("analytic_oracle: Q has the wrong length");
    }
    return (influence_matrix(layout) * q).array() + layout.ambient_floor;
}

Eigen::MatrixXd analytic_oracle_batch(const Layout& layout, const Eigen::MatrixXd& states,
                                      Execution execution) {
    if (static_cast<std::size_t>(states.cols()) != layout.J()) {
        throw DomainError("analytic_oracle_batch: state matrix has the wrong width");
    }
    const Eigen::MatrixXd g = influence_matrix(layout);
    const long n = states.rows();
    Eigen::MatrixXd out(n, g.rows());
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (long r = 0; r < n; ++r) {
            out.row(r) = (g * states.row(r).transpose()).transpose().array() + layout.ambient_floor;
        }
    } else {
        for (long r = 0; r < n; ++r) {
            out.row(r) = (g * states.row(r).transpose()).transpose().array() + layout.ambient_floor;
        }
    }
    return out;
}

Layout case_study_layout(const CaseStudyOptions& options) {
    constexpr double zone_x = 65.38, zone_y = 6.80, zone_z = 3.55;
    constexpr double wp_x = 57.73, wp_y = 4.80;
    if (!(options.grid_spacing > 0.0) || !(options.target_e_avg > options.ambient_floor)) {
        throw DomainError("case_study_layout: need grid_spacing > 0 and target above ambient");
    }
    Layout layout;
    layout.h_wp = 0.80;
    layout.ambient_floor = options.ambient_floor;

    const auto nx = static_cast<int>(std::ceil(wp_x / options.grid_spacing - 1e-9));
    const auto ny = static_cast<int>(std::ceil(wp_y / options.grid_spacing - 1e-9));
    const double x0 = 0.5 * (zone_x - wp_x), y0 = 0.5 * (zone_y - wp_y);
    for (int i = 0; i < nx; ++i) {
        for (int k = 0; k < ny; ++k) {
            layout.grid.push_back({x0 + (i + 0.5) * wp_x / nx, y0 + (k + 0.5) * wp_y / ny});
        }
    }

    auto add_row = [&](const char* tag, int count, double y, double rel) {
        for (int i = 0; i < count; ++i) {
            Luminaire l;
            l.id = static_cast<int>(layout.luminaires.size()) + 1;
            l.type_tag = tag;
            l.x = (i + 0.5) * zone_x / count;
            l.y = y;
            l.z = zone_z;
            l.intensity = rel;
            layout.luminaires.push_back(l);
        }
    };
    add_row("B7", 46, zone_y / 3.0, 1.0);
    add_row("D13", 30, 2.0 * zone_y / 3.0, options.d13_to_b7_ratio);

    // E_avg is affine in the global scale, but bisection keeps this robust to
    // any later change of the ambient model.
    const Eigen::MatrixXd unit = influence_matrix(layout);
    const double unit_avg = unit.rowwise().sum().mean();
    auto e_avg = [&](double s) { return options.ambient_floor + s * unit_avg; };
    double lo = 0.0, hi = 1.0;
    while (e_avg(hi) < options.target_e_avg) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (e_avg(mid) < options.target_e_avg ? lo : hi) = mid;
    }
    const double scale = 0.5 * (lo + hi);
    for (auto& l : layout.luminaires) {
        l.intensity *= scale;
    }
    return layout;
}

std::size_t sobol_max_dimension() {
    return boost::random::default_sobol_table::max_dimension;
}

namespace {

// Laine-Karras style hash permutation; applied to bit-reversed integers it
// yields a nested uniform scramble (Burley 2020).
std::uint32_t lk_permute(std::uint32_t x, std::uint32_t seed) {
    x += seed;
    x ^= x * 0x6c50b47cU;
    x ^= x * 0xb82f1e52U;
    x ^= x * 0xc7afe638U;
    x ^= x * 0x8d22f6e6U;
    return x;
}

std::uint32_t reverse_bits(std::uint32_t x) {
    x = ((x >> 1) & 0x55555555U) | ((x & 0x55555555U) << 1);
    x = ((x >> 2) & 0x33333333U) | ((x & 0x33333333U) << 2);
    x = ((x >> 4) & 0x0F0F0F0FU) | ((x & 0x0F0F0F0FU) << 4);
    x = ((x >> 8) & 0x00FF00FFU) | ((x & 0x00FF00FFU) << 8);
    return (x >> 16) | (x << 16);
}

std::uint32_t owen_scramble(std::uint32_t x, std::uint32_t seed) {
    return reverse_bits(lk_permute(reverse_bits(x), seed));
}

} // namespace

Eigen::MatrixXd sobol_states(std::size_t n, std::size_t J, std::uint64_t seed, bool scramble) {
    if (n == 0 || J == 0) {
        throw DomainError("sobol_states: n and J must be positive");
    }
    if (J > sobol_max_dimension()) {
        throw DomainError("sobol_states: dimension " + std::to_string(J) + " exceeds the supported " +
                          std::to_string(sobol_max_dimension()));
    }
    std::vector<std::uint32_t> seeds(J, 0);
    for (std::size_t d = 0; d < J; ++d) {
        seeds[d] = static_cast<std::uint32_t>(mix_seed({seed, 0x736f626fULL, d}) >> 32);
    }
    Eigen::MatrixXd out(n, J);
    // The engine starts at the second point of the sequence; row 0 is the origin.
    boost::random::sobol_engine<std::uint32_t, 32> engine(static_cast<unsigned>(J));
    constexpr double to_unit = 1.0 / 4294967296.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t d = 0; d < J; ++d) {
            std::uint32_t v = r == 0 ? 0U : static_cast<std::uint32_t>(engine());
            if (scramble) {
                v = owen_scramble(v, seeds[d]);
            }
            out(static_cast<long>(r), static_cast<long>(d)) = v * to_unit;
        }
    }
    return out;
}

Eigen::VectorXd SurrogateModel::predict(const Eigen::VectorXd& q) const {
    if (static_cast<std::size_t>(q.size()) != J()) {
        throw DomainError("predict: Q has length " + std::to_string(q.size()) + ", model expects " +
                          std::to_string(J()));
    }
    return intercept + coefficients * q;
}

Eigen::MatrixXd SurrogateModel::predict(const Eigen::MatrixXd& states) const {
    if (static_cast<std::size_t>(states.cols()) != J()) {
        throw DomainError("predict: state matrix has width " + std::to_string(states.cols()) +
                          ", model expects " + std::to_string(J()));
    }
    Eigen::MatrixXd out = states * coefficients.transpose();
    out.rowwise() += intercept.transpose();
    return out;
}

SurrogateModel fit_surrogate(const Eigen::MatrixXd& states, const Eigen::MatrixXd& illum) {
    const long n = states.rows(), J = states.cols();
    if (illum.rows() != n || illum.cols() == 0) {
        throw DomainError("fit_surrogate: states and illuminance row counts differ");
    }
    if (n < J + 1) {
        throw DomainError("fit_surrogate: need at least J + 1 rows");
    }
    if (!states.allFinite() || !illum.allFinite()) {
        throw DomainError("fit_surrogate: non-finite training entries");
    }
    Eigen::MatrixXd design(n, J + 1);
    design.col(0).setOnes();
    design.rightCols(J) = states;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < J + 1) {
        std::ostringstream msg;
        msg << "fit_surrogate: rank-deficient design (rank " << qr.rank() << " of " << J + 1
            << "); dependent columns:";
        const auto& perm = qr.colsPermutation().indices();
        for (long k = qr.rank(); k < J + 1; ++k) {
            const int c = perm[k];
            msg << ' ' << (c == 0 ? std::string("intercept") : "q_" + std::to_string(c));
        }
        throw SurrogateError(msg.str());
    }
    const Eigen::MatrixXd beta = qr.solve(illum); // (J+1) x N
    SurrogateModel model;
    model.intercept = beta.row(0).transpose();
    model.coefficients = beta.bottomRows(J).transpose();
    for (long j = 0; j < J; ++j) {
        const double tol = 1e-9 * model.coefficients.col(j).cwiseAbs().maxCoeff();
        for (long i = 0; i < model.coefficients.rows(); ++i) {
            double& c = model.coefficients(i, j);
            if (c < 0.0 && -c <= tol) {
                c = 0.0;
            }
        }
    }
    return model;
}

double holdout_r2(const SurrogateModel& model, const Eigen::MatrixXd& states,
                  const Eigen::MatrixXd& illum) {
    if (states.rows() == 0) {
        throw DomainError("holdout_r2: empty holdout");
    }
    const Eigen::MatrixXd pred = model.predict(states);
    if (pred.rows() != illum.rows() || pred.cols() != illum.cols()) {
        throw DomainError("holdout_r2: holdout illuminance has the wrong shape");
    }
    const double sse = (pred - illum).squaredNorm();
    const double sst = (illum.array() - illum.mean()).matrix().squaredNorm();
    if (sst == 0.0) {
        return sse == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - sse / sst;
}

double max_relative_error(const SurrogateModel& model, const Eigen::MatrixXd& states,
                          const Eigen::MatrixXd& illum) {
    const Eigen::MatrixXd pred = model.predict(states);
    const Eigen::ArrayXXd denom = illum.array().abs().max(1e-300);
    return ((pred - illum).array().abs() / denom).maxCoeff();
}

// ---------------------------------------------------------------- files

std::string layout_text(const Layout& layout) {
    std::ostringstream out;
    out << "[plane]\nh_wp," << csv::format(layout.h_wp) << "\nambient_floor," << csv::format(layout.ambient_floor)
        << "\n[luminaires]\nid,type,x_m,y_m,z_m,intensity_cd\n";
    for (const auto& l : layout.luminaires) {
        out << l.id << ',' << l.type_tag << ',' << csv::format(l.x) << ',' << csv::format(l.y) << ','
            << csv::format(l.z) << ',' << csv::format(l.intensity) << '\n';
    }
    out << "[grid]\nx_m,y_m\n";
    for (const auto& g : layout.grid) {
        out << csv::format(g.x) << ',' << csv::format(g.y) << '\n';
    }
    return out.str();
}

Layout read_layout(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    Layout layout;
    std::string section;
    bool header_pending = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::string line = csv::trim(lines[n]);
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line.front() == '[') {
            section = line;
            header_pending = section != "[plane]";
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto f = csv::split(line);
        if (section == "[plane]") {
            if (f.size() != 2) throw FormatError(where + ": expected key,value");
            const double v = csv::to_double(f[1], where + " " + f[0]);
            if (f[0] == "h_wp") {
                layout.h_wp = v;
            } else if (f[0] == "ambient_floor") {
                layout.ambient_floor = v;
            } else {
                throw FormatError(where + ": unknown plane key '" + f[0] + "'");
            }
        } else if (section == "[luminaires]") {
            if (f.size() != 6) throw FormatError(where + ": luminaire rows need 6 fields");
            Luminaire l;
            l.id = static_cast<int>(csv::to_int(f[0], where + " id"));
            l.type_tag = csv::trim(f[1]);
            l.x = csv::to_double(f[2], where + " x_m");
            l.y = csv::to_double(f[3], where + " y_m");
            l.z = csv::to_double(f[4], where + " z_m");
            l.intensity = csv::to_double(f[5], where + " intensity_cd");
            layout.luminaires.push_back(l);
        } else if (section == "[grid]") {
            if (f.size() != 2) throw FormatError(where + ": grid rows need 2 fields");
            layout.grid.push_back({csv::to_double(f[0], where + " x_m"), csv::to_double(f[1], where + " y_m")});
        } else {
            throw FormatError(where + ": data outside a known section");
        }
    }
    try {
        layout.validate();
    } catch (const DomainError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return layout;
}

std::string pairs_csv(const TrainingPairs& pairs) {
    std::ostringstream out;
    const long J = pairs.states.cols(), N = pairs.illum.cols();
    for (long j = 0; j < J; ++j) out << (j ? "," : "") << "q_" << j + 1;
    for (long i = 0; i < N; ++i) out << ",e_" << i + 1;
    out << '\n';
    for (long r = 0; r < pairs.states.rows(); ++r) {
        for (long j = 0; j < J; ++j) out << (j ? "," : "") << csv::format(pairs.states(r, j));
        for (long i = 0; i < N; ++i) out << ',' << csv::format(pairs.illum(r, i));
        out << '\n';
    }
    return out.str();
}

TrainingPairs read_pairs(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) {
        throw FormatError(path.string() + ": empty training-pairs file");
    }
    const auto header = csv::split(lines[0]);
    long J = 0, N = 0;
    for (const auto& h : header) {
        const std::string t = csv::trim(h);
        if (t.rfind("q_", 0) == 0) {
            if (N > 0) throw FormatError(path.string() + ":1: q_ columns must precede e_ columns");
            ++J;
        } else if (t.rfind("e_", 0) == 0) {
            ++N;
        } else {
            throw FormatError(path.string() + ":1: unexpected column '" + t + "'");
        }
    }
    if (J == 0 || N == 0) {
        throw FormatError(path.string() + ":1: need q_ and e_ columns");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (!csv::trim(lines[n]).empty()) rows.push_back(csv::split(lines[n]));
    }
    TrainingPairs p{Eigen::MatrixXd(rows.size(), J), Eigen::MatrixXd(rows.size(), N)};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string where = path.string() + ":" + std::to_string(r + 2);
        if (static_cast<long>(rows[r].size()) != J + N) {
            throw FormatError(where + ": expected " + std::to_string(J + N) + " fields");
        }
        for (long j = 0; j < J; ++j) p.states(r, j) = csv::to_double(rows[r][j], where + " q_" + std::to_string(j + 1));
        for (long i = 0; i < N; ++i) p.illum(r, i) = csv::to_double(rows[r][J + i], where + " e_" + std::to_string(i + 1));
    }
    return p;
}

namespace {

std::string surrogate_body(const SurrogateModel& model) {
    std::ostringstream body;
    for (long i = 0; i < model.coefficients.rows(); ++i) {
        body << csv::format(model.intercept[i]);
        for (long j = 0; j < model.coefficients.cols(); ++j) body << ',' << csv::format(model.coefficients(i, j));
        body << '\n';
    }
    return body.str();
}

std::string crc_hex(const std::string& s) {
    boost::crc_32_type crc;
    crc.process_bytes(s.data(), s.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
    return buf;
}

} // namespace

std::string surrogate_text(const SurrogateModel& model) {
    const std::string body = surrogate_body(model);
    std::ostringstream out;
    out << "# ledmaint affine illuminance surrogate\n"
        << "format,1\n"
        << "J," << model.J() << '\n'
        << "N," << model.N() << '\n'
        << "rows," << model.N() << '\n'
        << "cols," << model.J() + 1 << '\n'
        << "crc32," << crc_hex(body) << '\n'
        << "# row i: intercept_i,c_i1..c_iJ (lux)\n"
        << body;
    return out.str();
}

SurrogateModel read_surrogate(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    const std::string p = path.string();
    if (lines.size() < 8) {
        throw FormatError(p + ": surrogate header needs 8 lines");
    }
    auto value = [&](std::size_t idx, const std::string& key) {
        const auto f = csv::split(lines[idx]);
        if (f.size() != 2 || csv::trim(f[0]) != key) {
            throw FormatError(p + ":" + std::to_string(idx + 1) + ": expected '" + key + ",...'");
        }
        return csv::trim(f[1]);
    };
    if (value(1, "format") != "1") throw FormatError(p + ":2: unsupported format version");
    const long J = csv::to_int(value(2, "J"), p + ":3 J");
    const long N = csv::to_int(value(3, "N"), p + ":4 N");
    const std::string crc = value(6, "crc32");
    if (J <= 0 || N <= 0 || csv::to_int(value(4, "rows"), p + ":5 rows") != N ||
        csv::to_int(value(5, "cols"), p + ":6 cols") != J + 1) {
        throw FormatError(p + ": inconsistent J/N/rows/cols header");
    }
    if (static_cast<long>(lines.size()) < 8 + N) {
        throw FormatError(p + ": expected " + std::to_string(N) + " matrix rows");
    }
    std::string body;
    SurrogateModel m{Eigen::VectorXd(N), Eigen::MatrixXd(N, J)};
    for (long i = 0; i < N; ++i) {
        const std::string& line = lines[8 + i];
        body += line;
        body += '\n';
        const auto f = csv::split(line);
        const std::string where = p + ":" + std::to_string(9 + i);
        if (static_cast<long>(f.size()) != J + 1) throw FormatError(where + ": expected J + 1 fields");
        m.intercept[i] = csv::to_double(f[0], where + " intercept");
        for (long j = 0; j < J; ++j) m.coefficients(i, j) = csv::to_double(f[j + 1], where + " c_" + std::to_string(j + 1));
    }
    if (crc_hex(body) != crc) {
        throw FormatError(p + ": checksum mismatch (file says " + crc + ", body hashes to " + crc_hex(body) + ")");
    }
    return m;
}

} // namespace ledmaint
