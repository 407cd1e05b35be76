#include "ledmaint/calibration.hpp"

#include "ledmaint/csv.hpp"
#include "ledmaint/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace ledmaint {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double record_log_density(const Theta& theta, const AdtRecord& r) {
    const double dx = r.x_curr - r.x_prev;
    if (dx < 0.0) {
        throw DataError("negative degradation increment for unit " + std::to_string(r.unit_id));
    }
    const double shape = theta.shape_increment(r.t_prev, r.t_curr);
    const double rate = rate_at_temperature(theta, r.temp_k);
    return stats::gamma_log_pdf(std::max(dx, kZeroIncrementFloor), shape, rate);
}

double finite_or_neg_inf(double v) {
    return std::isnan(v) || v == std::numeric_limits<double>::infinity() ? kNegInf : v;
}

} // namespace

// ---------------------------------------------------------------------------
// Dataset

void AdtDataset::validate() const {
    std::map<long long, const AdtRecord*> last;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "record " + std::to_string(i + 1) + " (unit " + std::to_string(r.unit_id) + ")";
        if (!(r.temp_k > 0.0)) {
            throw DataError(where + ": temp_K must be positive");
        }
        if (!(r.t_curr > r.t_prev) || r.t_prev < 0.0) {
            throw DataError(where + ": need 0 <= t_prev < t_curr");
        }
        if (!(r.x_prev >= 0.0) || !(r.x_curr >= r.x_prev)) {
            throw DataError(where + ": need 0 <= x_prev <= x_curr");
        }
        auto it = last.find(r.unit_id);
        if (it != last.end()) {
            const auto& p = *it->second;
            if (p.t_curr != r.t_prev || p.x_curr != r.x_prev || p.temp_k != r.temp_k) {
                throw DataError(where + ": does not continue the previous record of its unit");
            }
        }
        last[r.unit_id] = &r;
    }
}

std::vector<double> AdtDataset::temperatures() const {
    std::vector<double> temps;
    for (const auto& r : records) {
        if (std::find(temps.begin(), temps.end(), r.temp_k) == temps.end()) {
            temps.push_back(r.temp_k);
        }
    }
    std::sort(temps.begin(), temps.end());
    return temps;
}

AdtDataset AdtDataset::filter_temperature(double kelvin, bool keep) const {
    AdtDataset out;
    for (const auto& r : records) {
        if ((std::fabs(r.temp_k - kelvin) < 1e-9) == keep) {
            out.records.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Densities

void PriorSpec::validate() const {
    if (!(ln_a_sd > 0.0) || !(ln_c_sd > 0.0) || !(b_scale > 0.0) || !(ea_scale > 0.0)) {
        throw DomainError("prior scales must be positive");
    }
}

double PriorSpec::log_density(const Theta& theta) const {
    if (!(theta.b > 0.0) || !(theta.activation_energy >= 0.0)) {
        return kNegInf;
    }
    constexpr double half_log_2pi = 0.91893853320467274178;
    constexpr double log2 = 0.69314718055994530942;
    auto normal = [](double x, double sd) {
        return -0.5 * (x / sd) * (x / sd) - std::log(sd) - half_log_2pi;
    };
    return normal(theta.ln_a, ln_a_sd) + normal(theta.ln_c, ln_c_sd) + normal(theta.b, b_scale) + log2 +
           normal(theta.activation_energy, ea_scale) + log2;
}

double log_likelihood(const Theta& theta, const AdtDataset& data) {
    double total = 0.0;
    for (const auto& r : data.records) {
        total += record_log_density(theta, r);
    }
    return data.records.empty() ? 0.0 : finite_or_neg_inf(total);
}

double log_posterior(const Theta& theta, const AdtDataset& data, const PriorSpec& prior) {
    const double lp = prior.log_density(theta);
    if (lp == kNegInf) {
        return kNegInf;
    }
    return finite_or_neg_inf(lp + log_likelihood(theta, data));
}

GroupedLikelihood::GroupedLikelihood(const AdtDataset& data) {
    std::map<std::tuple<double, double, double>, std::size_t> index;
    for (const auto& r : data.records) {
        const double dx = r.x_curr - r.x_prev;
        if (dx < 0.0) {
            throw DataError("negative degradation increment for unit " + std::to_string(r.unit_id));
        }
        const auto key = std::make_tuple(r.t_prev, r.t_curr, r.temp_k);
        auto [it, inserted] = index.try_emplace(key, groups_.size());
        if (inserted) {
            groups_.push_back(Group{r.t_prev, r.t_curr, r.temp_k});
        }
        auto& g = groups_[it->second];
        const double floored = std::max(dx, kZeroIncrementFloor);
        g.count += 1.0;
        g.sum_dx += floored;
        g.sum_log_dx += std::log(floored);
    }
}

double GroupedLikelihood::operator()(const Theta& theta) const {
    double total = 0.0;
    for (const auto& g : groups_) {
        const double shape = theta.shape_increment(g.t_prev, g.t_curr);
        const double rate = rate_at_temperature(theta, g.temp_k);
        total += g.count * (shape * std::log(rate) - std::lgamma(shape)) + (shape - 1.0) * g.sum_log_dx -
                 rate * g.sum_dx;
    }
    return finite_or_neg_inf(total);
}

double acceptance_probability(double log_current, double log_proposed) {
    if (log_proposed == kNegInf) {
        return 0.0;
    }
    if (log_current == kNegInf) {
        return 1.0;
    }
    const double d = log_proposed - log_current;
    return d >= 0.0 ? 1.0 : std::exp(d);
}

// ---------------------------------------------------------------------------
// Sampler

std::size_t PosteriorSamples::draw_count() const {
    std::size_t n = 0;
    for (const auto& c : chains) {
        n += c.size();
    }
    return n;
}

std::vector<Theta> PosteriorSamples::pooled() const {
    std::vector<Theta> out;
    out.reserve(draw_count());
    for (const auto& c : chains) {
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

namespace {

using Phi = Eigen::Vector4d;

constexpr double kMinLogEa = -30.0;

// The sampler works on phi = (ln A, ln b, ln beta(T_ref), ln Ea) where
// ln beta(T_ref) = ln C + Ea / (k_B T_ref) and 1/T_ref is the mean inverse
// test temperature. ln C and Ea are nearly collinear over a narrow stress
// range; centring removes most of that ridge. The map ln C -> ln beta(T_ref)
// is a unit-Jacobian shear, so only the two log transforms add Jacobian terms.
struct Parameterization {
    double inv_kt_ref = 0.0;

    Theta to_theta(const Phi& p) const {
        const double ea = std::exp(p[3]);
        return Theta{p[0], std::exp(p[1]), p[2] - ea * inv_kt_ref, ea};
    }

    Phi to_phi(const Theta& t) const {
        return Phi{t.ln_a, std::log(t.b), t.ln_c + t.activation_energy * inv_kt_ref,
                   std::max(std::log(t.activation_energy), kMinLogEa)};
    }
};

struct Target {
    const GroupedLikelihood& likelihood;
    const PriorSpec& prior;
    Parameterization param;

    double operator()(const Phi& phi) const {
        if (!phi.allFinite()) {
            return kNegInf;
        }
        const Theta theta = param.to_theta(phi);
        const double lp = prior.log_density(theta);
        if (lp == kNegInf) {
            return kNegInf;
        }
        return finite_or_neg_inf(lp + likelihood(theta) + phi[1] + phi[3]);
    }
};

Eigen::Vector4d normal4(Engine& eng) {
    return Eigen::Vector4d{standard_normal(eng), standard_normal(eng), standard_normal(eng), standard_normal(eng)};
}

struct ChainOutput {
    std::vector<Theta> draws;
    double acceptance = 0.0;
};

std::optional<Eigen::Matrix4d> covariance_factor(const std::vector<Phi>& draws) {
    if (draws.size() < 20) {
        return std::nullopt;
    }
    Phi m = Phi::Zero();
    for (const auto& p : draws) m += p;
    m /= static_cast<double>(draws.size());
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    for (const auto& p : draws) cov += (p - m) * (p - m).transpose();
    cov /= static_cast<double>(draws.size() - 1);
    if (cov.diagonal().minCoeff() <= 1e-14) {
        return std::nullopt;
    }
    cov += 1e-10 * Eigen::Matrix4d::Identity();
    Eigen::LLT<Eigen::Matrix4d> llt(cov);
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    return Eigen::Matrix4d(llt.matrixL());
}

ChainOutput run_chain(const Target& target, const Theta& init, const McmcOptions& opt, int chain) {
    Engine eng = make_stream({opt.seed, 0x6d636d63ULL, static_cast<std::uint64_t>(chain)});
    ChainOutput out;
    out.draws.reserve(static_cast<std::size_t>(opt.samples));
    const auto& param = target.param;
    const int thin = opt.steps_per_iteration;

    Phi phi = param.to_phi(init);
    double logp = target(phi);
    if (logp == kNegInf) {
        throw CalibrationError("initial point has zero posterior density");
    }
    if (!opt.fixed_proposal_scale) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            const Phi jittered = phi + 0.05 * normal4(eng);
            const double lj = target(jittered);
            if (lj != kNegInf) {
                phi = jittered;
                logp = lj;
                break;
            }
        }
    }

    auto step = [&](const Phi& proposal) {
        const double lq = target(proposal);
        if (uniform01(eng) < acceptance_probability(logp, lq)) {
            phi = proposal;
            logp = lq;
            return true;
        }
        return false;
    };

    if (opt.fixed_proposal_scale) {
        const double s = *opt.fixed_proposal_scale;
        long accepted = 0;
        for (int it = 0; it < opt.warmup + opt.samples; ++it) {
            for (int k = 0; k < thin; ++k) {
                const bool acc = step(phi + s * normal4(eng));
                accepted += acc && it >= opt.warmup;
            }
            if (it >= opt.warmup) {
                out.draws.push_back(param.to_theta(phi));
            }
        }
        out.acceptance = opt.samples > 0 ? static_cast<double>(accepted) / (static_cast<double>(opt.samples) * thin) : 0.0;
        return out;
    }

    // Warmup: coordinate-wise Robbins-Monro scales (1-D target 0.44), then
    // three windows of joint proposals whose covariance is re-estimated from
    // the previous window, then a final window that only tunes the global
    // scale toward target_acceptance.
    const int warmup = opt.warmup;
    const bool full_schedule = warmup >= 40;
    const int coord_end = full_schedule ? (3 * warmup) / 20 : warmup;
    const int windows[4] = {coord_end, (7 * warmup) / 20, (12 * warmup) / 20, (17 * warmup) / 20};

    Eigen::Vector4d log_scales = Eigen::Vector4d::Constant(std::log(0.1));
    std::vector<Phi> window_draws;
    for (int it = 0; it < coord_end; ++it) {
        const double gain = std::min(0.5, 5.0 / std::sqrt(it + 1.0));
        for (int i = 0; i < 4; ++i) {
            Phi prop = phi;
            prop[i] += std::exp(log_scales[i]) * standard_normal(eng);
            const bool acc = step(prop);
            log_scales[i] += gain * ((acc ? 1.0 : 0.0) - 0.44);
        }
        if (it >= coord_end / 2) {
            window_draws.push_back(phi);
        }
    }

    Eigen::Matrix4d chol = log_scales.array().exp().matrix().asDiagonal();
    double log_global = std::log(2.38 / 2.0);
    long tail_accepted = 0;
    if (full_schedule) {
        for (int w = 0; w < 4; ++w) {
            if (auto f = covariance_factor(window_draws)) {
                chol = *f;
                log_global = std::log(2.38 / 2.0);
            }
            window_draws.clear();
            const int begin = windows[w];
            const int end = w < 3 ? windows[w + 1] : warmup;
            tail_accepted = 0;
            long n_step = 0;
            double avg_sum = 0.0;
            long avg_count = 0;
            for (int it = begin; it < end; ++it) {
                for (int k = 0; k < thin; ++k) {
                    const bool acc = step(phi + std::exp(log_global) * (chol * normal4(eng)));
                    const double gain = std::min(0.5, 5.0 / std::sqrt(static_cast<double>(++n_step)));
                    log_global += gain * ((acc ? 1.0 : 0.0) - opt.target_acceptance);
                    tail_accepted += acc;
                    if (2 * (it - begin) >= end - begin) {
                        avg_sum += log_global;
                        ++avg_count;
                    }
                }
                window_draws.push_back(phi);
            }
            // Averaging the second half of the trajectory removes most of the
            // stochastic-approximation noise left in the final iterate.
            if (avg_count > 0) {
                log_global = avg_sum / static_cast<double>(avg_count);
            }
        }
        if (tail_accepted == 0) {
            std::ostringstream msg;
            msg << "adaptation failed: every joint proposal rejected in chain " << chain << "; phi = ["
                << phi.transpose() << "], log target = " << logp << ", coordinate scales = ["
                << log_scales.array().exp().transpose() << "], global scale = " << std::exp(log_global);
            throw CalibrationError(msg.str());
        }
    }

    const Eigen::Matrix4d proposal = std::exp(log_global) * chol;
    long accepted = 0;
    for (int it = 0; it < opt.samples; ++it) {
        for (int k = 0; k < thin; ++k) {
            accepted += step(phi + proposal * normal4(eng));
        }
        out.draws.push_back(param.to_theta(phi));
    }
    out.acceptance = opt.samples > 0 ? static_cast<double>(accepted) / (static_cast<double>(opt.samples) * thin) : 0.0;
    return out;
}

} // namespace

Theta moment_estimate(const AdtDataset& data) {
    const Theta fallback{0.0, 0.5, 0.0, 0.1};
    struct Unit {
        double temp, t_start, t_end, x_start, x_end;
        std::map<double, double> x_at;
    };
    std::map<long long, Unit> units;
    for (const auto& r : data.records) {
        auto [it, inserted] = units.try_emplace(r.unit_id, Unit{r.temp_k, r.t_prev, r.t_curr, r.x_prev, r.x_curr, {}});
        auto& u = it->second;
        if (!inserted) {
            u.t_end = r.t_curr;
            u.x_end = r.x_curr;
        }
        u.x_at[r.t_curr] = r.x_curr;
    }
    std::map<double, std::vector<const Unit*>> by_temp;
    for (const auto& [id, u] : units) {
        by_temp[u.temp].push_back(&u);
    }

    std::vector<double> inv_kt, log_rate, total_shape;
    double ratio_sum = 0.0, t_mid = 0.0, t_start = 0.0, t_end = 0.0;
    int ratio_n = 0;
    for (const auto& [temp, list] : by_temp) {
        if (list.size() < 2) continue;
        std::vector<double> totals;
        for (const auto* u : list) totals.push_back(u->x_end - u->x_start);
        const double m = stats::mean(totals);
        const double v = stats::sample_variance(totals);
        if (!(m > 0.0) || !(v > 0.0)) continue;
        const double rate = m / v;
        inv_kt.push_back(1.0 / (PhysicalConstants::boltzmann_ev_per_k * temp));
        log_rate.push_back(std::log(rate));
        total_shape.push_back(m * rate);

        const auto* u0 = list.front();
        if (u0->x_at.size() >= 2) {
            t_start = u0->t_start;
            t_end = u0->t_end;
            auto mid = u0->x_at.begin();
            std::advance(mid, (u0->x_at.size() - 1) / 2);
            t_mid = mid->first;
            double num = 0.0;
            for (const auto* u : list) {
                auto f = u->x_at.find(t_mid);
                if (f != u->x_at.end()) num += f->second - u->x_start;
            }
            ratio_sum += num / (m * static_cast<double>(list.size()));
            ++ratio_n;
        }
    }
    if (log_rate.empty()) {
        return fallback;
    }

    Theta est = fallback;
    if (log_rate.size() >= 2) {
        const double xm = stats::mean(inv_kt), ym = stats::mean(log_rate);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < inv_kt.size(); ++i) {
            sxy += (inv_kt[i] - xm) * (log_rate[i] - ym);
            sxx += (inv_kt[i] - xm) * (inv_kt[i] - xm);
        }
        est.activation_energy = std::clamp(sxx > 0.0 ? sxy / sxx : 0.1, 1e-3, 5.0);
        est.ln_c = ym - est.activation_energy * xm;
    } else {
        est.activation_energy = 0.1;
        est.ln_c = log_rate[0] - est.activation_energy * inv_kt[0];
    }

    if (ratio_n > 0 && t_end > t_mid && t_mid > t_start) {
        // Solve (e^{b tm} - e^{b ts}) / (e^{b te} - e^{b ts}) = r for b.
        const double r = ratio_sum / ratio_n;
        auto g = [&](double b) {
            return std::expm1(b * (t_mid - t_start)) / std::expm1(b * (t_end - t_start)) - r;
        };
        double lo = 1e-4, hi = 50.0 / (t_end - t_start);
        if (g(lo) > 0.0 && g(hi) < 0.0) {
            for (int i = 0; i < 200; ++i) {
                const double midb = 0.5 * (lo + hi);
                (g(midb) > 0.0 ? lo : hi) = midb;
            }
            est.b = 0.5 * (lo + hi);
        }
        const double shape = stats::mean(total_shape);
        est.ln_a = std::log(shape) - est.b * t_start - std::log(std::expm1(est.b * (t_end - t_start)));
    }
    return est;
}

PosteriorSamples run_mcmc(const AdtDataset& data, const PriorSpec& prior, const McmcOptions& options) {
    if (options.chains <= 0 || options.samples <= 0 || options.warmup < 0 || options.steps_per_iteration <= 0) {
        throw DomainError("run_mcmc: chain, warmup and sample counts must be positive");
    }
    data.validate();
    prior.validate();
    const GroupedLikelihood likelihood(data);
    double inv_kt_ref = 0.0;
    for (const auto& r : data.records) {
        inv_kt_ref += 1.0 / (PhysicalConstants::boltzmann_ev_per_k * r.temp_k);
    }
    if (!data.records.empty()) {
        inv_kt_ref /= static_cast<double>(data.records.size());
    }
    const Target target{likelihood, prior, Parameterization{inv_kt_ref}};
    const Theta init = options.init ? *options.init : moment_estimate(data);

    std::vector<ChainOutput> outputs(static_cast<std::size_t>(options.chains));
    if (options.execution == Execution::parallel) {
        std::vector<std::string> errors(outputs.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (int c = 0; c < options.chains; ++c) {
            try {
                outputs[static_cast<std::size_t>(c)] = run_chain(target, init, options, c);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(c)] = e.what();
            }
        }
        for (const auto& e : errors) {
            if (!e.empty()) throw CalibrationError(e);
        }
    } else {
        for (int c = 0; c < options.chains; ++c) {
            outputs[static_cast<std::size_t>(c)] = run_chain(target, init, options, c);
        }
    }

    PosteriorSamples samples;
    samples.warmup_count = options.warmup;
    for (auto& o : outputs) {
        samples.chains.push_back(std::move(o.draws));
        samples.acceptance_rate.push_back(o.acceptance);
    }
    samples.rhat = split_rhat(samples);
    return samples;
}

// ---------------------------------------------------------------------------
// Diagnostics

double split_rhat(const std::vector<std::vector<double>>& chains) {
    std::vector<std::span<const double>> halves;
    for (const auto& c : chains) {
        if (c.size() < 4) {
            throw DomainError("split_rhat: need at least 4 draws per chain");
        }
        const std::size_t half = c.size() / 2;
        halves.emplace_back(c.data(), half);
        halves.emplace_back(c.data() + (c.size() - half), half);
    }
    if (halves.size() < 2) {
        throw DomainError("split_rhat: need at least one chain");
    }
    const auto n = static_cast<double>(halves.front().size());
    const auto m = static_cast<double>(halves.size());
    std::vector<double> means;
    double within = 0.0;
    for (auto h : halves) {
        means.push_back(stats::mean(h));
        within += stats::sample_variance(h);
    }
    within /= m;
    const double between = n * stats::sample_variance(means);
    if (within <= 0.0) {
        return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    const double var_plus = (n - 1.0) / n * within + between / n;
    return std::sqrt(var_plus / within);
}

std::vector<std::vector<double>> parameter_chains(const PosteriorSamples& samples, int index) {
    std::vector<std::vector<double>> out;
    for (const auto& chain : samples.chains) {
        std::vector<double> v;
        v.reserve(chain.size());
        for (const auto& t : chain) {
            const double vals[4] = {t.ln_a, t.b, t.ln_c, t.activation_energy};
            v.push_back(vals[index]);
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::array<double, 4> split_rhat(const PosteriorSamples& samples) {
    std::array<double, 4> r{};
    for (int i = 0; i < 4; ++i) {
        r[static_cast<std::size_t>(i)] = split_rhat(parameter_chains(samples, i));
    }
    return r;
}

std::array<ParamSummary, 4> summarize(const PosteriorSamples& samples) {
    static const char* names[4] = {"ln_A", "b", "ln_C", "E_a"};
    std::array<ParamSummary, 4> out;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> all;
        for (const auto& c : parameter_chains(samples, i)) all.insert(all.end(), c.begin(), c.end());
        auto& s = out[static_cast<std::size_t>(i)];
        s.name = names[i];
        s.mean = stats::mean(all);
        s.lower = stats::quantile(all, 0.025);
        s.upper = stats::quantile(all, 0.975);
        s.rhat = samples.rhat[static_cast<std::size_t>(i)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Uncertainty propagation

PredictiveBand posterior_predictive(const PosteriorSamples& samples, double kelvin,
                                    std::span<const double> times_years, std::uint64_t seed,
                                    std::size_t max_draws, Execution execution) {
    const auto draws = samples.pooled();
    if (draws.empty()) {
        throw DomainError("posterior_predictive: no posterior draws");
    }
    for (std::size_t i = 0; i < times_years.size(); ++i) {
        if (times_years[i] < 0.0 || (i > 0 && times_years[i] < times_years[i - 1])) {
            throw DomainError("posterior_predictive: times must be non-negative and sorted");
        }
    }
    std::vector<std::size_t> picks;
    if (max_draws == 0 || max_draws >= draws.size()) {
        picks.resize(draws.size());
        for (std::size_t i = 0; i < draws.size(); ++i) picks[i] = i;
    } else {
        for (std::size_t i = 0; i < max_draws; ++i) {
            picks.push_back(i * draws.size() / max_draws);
        }
    }

    const std::size_t nt = times_years.size();
    const std::size_t nd = picks.size();
    std::vector<double> values(nd * nt);
    auto simulate = [&](std::size_t d) {
        const Theta& th = draws[picks[d]];
        Engine eng = make_stream({seed, 0x70707270ULL, static_cast<std::uint64_t>(picks[d])});
        const double rate = rate_at_temperature(th, kelvin);
        double x = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < nt; ++i) {
            if (times_years[i] > prev) {
                x += gamma_variate(eng, th.shape_increment(prev, times_years[i]), rate);
                prev = times_years[i];
            }
            values[d * nt + i] = x;
        }
    };
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t d = 0; d < nd; ++d) simulate(d);
    } else {
        for (std::size_t d = 0; d < nd; ++d) simulate(d);
    }

    PredictiveBand band;
    band.times.assign(times_years.begin(), times_years.end());
    std::vector<double> column(nd);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t d = 0; d < nd; ++d) column[d] = values[d * nt + i];
        band.mean.push_back(stats::mean(column));
        band.lower.push_back(stats::quantile(column, 0.025));
        band.upper.push_back(stats::quantile(column, 0.975));
    }
    return band;
}

std::vector<PathSpec> two_stage_draws(const PosteriorSamples& samples, std::size_t n_path,
                                      std::size_t n_ps, double kelvin, std::uint64_t seed) {
    const auto draws = samples.pooled();
    if (n_path == 0 || n_ps == 0) {
        throw DomainError("two_stage_draws: n_path and n_ps must be positive");
    }
    if (n_path > draws.size()) {
        throw DomainError("two_stage_draws: n_path exceeds the retained draw count");
    }
    std::vector<std::size_t> order(draws.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Engine eng = make_stream({seed, 0x74777374ULL});
    for (std::size_t i = 0; i < n_path; ++i) {
        const auto j = i + uniform_index(eng, order.size() - i);
        std::swap(order[i], order[j]);
    }
    std::vector<PathSpec> specs;
    specs.reserve(n_path * n_ps);
    for (std::size_t l = 0; l < n_path; ++l) {
        for (std::size_t m = 0; m < n_ps; ++m) {
            specs.push_back(PathSpec{draws[order[l]], kelvin, mix_seed({seed, l, m}), l, m});
        }
    }
    return specs;
}

AdtDataset synth_lm80(const Theta& true_theta, std::span<const double> temps_kelvin, int units_per_temp,
                      double inspection_step_hours, double total_hours, std::uint64_t seed) {
    true_theta.validate();
    if (units_per_temp < 0 || !(inspection_step_hours > 0.0) || !(total_hours > 0.0)) {
        throw DomainError("synth_lm80: counts and durations must be positive");
    }
    const auto steps = static_cast<int>(std::floor(total_hours / inspection_step_hours + 1e-9));
    AdtDataset data;
    for (std::size_t ti = 0; ti < temps_kelvin.size(); ++ti) {
        const double temp = temps_kelvin[ti];
        const double rate = rate_at_temperature(true_theta, temp);
        for (int u = 0; u < units_per_temp; ++u) {
            Engine eng = make_stream({seed, 0x6c6d3830ULL, ti, static_cast<std::uint64_t>(u)});
            double x = 0.0;
            for (int k = 1; k <= steps; ++k) {
                const double t0 = (k - 1) * inspection_step_hours / kHoursPerYear;
                const double t1 = k * inspection_step_hours / kHoursPerYear;
                const double x1 = x + gamma_variate(eng, true_theta.shape_increment(t0, t1), rate);
                data.records.push_back(AdtRecord{static_cast<long long>(ti) * units_per_temp + u, temp, t0, t1, x, x1});
                x = x1;
            }
        }
    }
    return data;
}

HoldoutValidation leave_one_temperature_out(const AdtDataset& data, double held_out_kelvin,
                                            const PriorSpec& prior, const McmcOptions& options,
                                            std::size_t max_predictive_draws) {
    const AdtDataset train = data.filter_temperature(held_out_kelvin, false);
    const AdtDataset test = data.filter_temperature(held_out_kelvin, true);
    if (test.records.empty()) {
        throw DataError("no records at the held-out temperature");
    }
    HoldoutValidation v;
    v.posterior = run_mcmc(train, prior, options);

    std::vector<double> times{0.0};
    for (const auto& r : test.records) times.push_back(r.t_curr);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    v.band = posterior_predictive(v.posterior, held_out_kelvin, times, options.seed ^ 0x686f6c64ULL,
                                  max_predictive_draws, options.execution);
    for (const auto& r : test.records) {
        const auto i = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), r.t_curr) - times.begin());
        ++v.observations;
        if (r.x_curr >= v.band.lower[i] && r.x_curr <= v.band.upper[i]) {
            ++v.covered;
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Files

namespace {
constexpr const char* kAdtHeader = "unit_id,temp_K,t_prev_yr,t_curr_yr,x_prev,x_curr";
constexpr const char* kDrawsHeader = "chain,draw,ln_A,b,ln_C,E_a";
} // namespace

AdtDataset read_adt_csv(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::trim(lines[0]) != kAdtHeader) {
        throw FormatError(path.string() + ": expected header '" + kAdtHeader + "'");
    }
    static const char* fields[6] = {"unit_id", "temp_K", "t_prev_yr", "t_curr_yr", "x_prev", "x_curr"};
    AdtDataset data;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto tok = csv::split(lines[i]);
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (tok.size() != 6) {
            throw FormatError(where + ": expected 6 fields");
        }
        AdtRecord r;
        r.unit_id = csv::to_int(tok[0], where + " field " + fields[0]);
        r.temp_k = csv::to_double(tok[1], where + " field " + fields[1]);
        r.t_prev = csv::to_double(tok[2], where + " field " + fields[2]);
        r.t_curr = csv::to_double(tok[3], where + " field " + fields[3]);
        r.x_prev = csv::to_double(tok[4], where + " field " + fields[4]);
        r.x_curr = csv::to_double(tok[5], where + " field " + fields[5]);
        data.records.push_back(r);
    }
    data.validate();
    return data;
}

std::string adt_csv(const AdtDataset& data) {
    std::ostringstream out;
    out << kAdtHeader << '\n';
    for (const auto& r : data.records) {
        out << r.unit_id << ',' << csv::format(r.temp_k) << ',' << csv::format(r.t_prev) << ','
            << csv::format(r.t_curr) << ',' << csv::format(r.x_prev) << ',' << csv::format(r.x_curr) << '\n';
    }
    return out.str();
}

std::string draws_csv(const PosteriorSamples& samples) {
    std::ostringstream out;
    out << kDrawsHeader << '\n';
    for (std::size_t c = 0; c < samples.chains.size(); ++c) {
        for (std::size_t d = 0; d < samples.chains[c].size(); ++d) {
            const auto& t = samples.chains[c][d];
            out << c << ',' << d << ',' << csv::format(t.ln_a) << ',' << csv::format(t.b) << ','
                << csv::format(t.ln_c) << ',' << csv::format(t.activation_energy) << '\n';
        }
    }
    return out.str();
}

PosteriorSamples read_draws_csv(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::trim(lines[0]) != kDrawsHeader) {
        throw FormatError(path.string() + ": expected header '" + kDrawsHeader + "'");
    }
    PosteriorSamples s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto tok = csv::split(lines[i]);
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (tok.size() != 6) {
            throw FormatError(where + ": expected 6 fields");
        }
        const auto chain = csv::to_int(tok[0], where + " field chain");
        if (chain < 0) throw FormatError(where + ": negative chain index");
        if (static_cast<std::size_t>(chain) >= s.chains.size()) s.chains.resize(static_cast<std::size_t>(chain) + 1);
        Theta t{csv::to_double(tok[2], where + " field ln_A"), csv::to_double(tok[3], where + " field b"),
                csv::to_double(tok[4], where + " field ln_C"), csv::to_double(tok[5], where + " field E_a")};
        t.validate();
        s.chains[static_cast<std::size_t>(chain)].push_back(t);
    }
    if (s.draw_count() == 0) {
        throw FormatError(path.string() + ": no draws");
    }
    bool rhat_ok = true;
    for (const auto& c : s.chains) rhat_ok = rhat_ok && c.size() >= 4;
    if (rhat_ok) s.rhat = split_rhat(s);
    return s;
}

std::string diagnostics_csv(const PosteriorSamples& samples) {
    std::ostringstream out;
    out << "param,mean,q2.5,q97.5,rhat\n";
    for (const auto& p : summarize(samples)) {
        out << p.name << ',' << csv::format(p.mean) << ',' << csv::format(p.lower) << ','
            << csv::format(p.upper) << ',' << csv::format(p.rhat) << '\n';
    }
    out << "\nchain,acceptance_rate\n";
    for (std::size_t c = 0; c < samples.acceptance_rate.size(); ++c) {
        out << c << ',' << csv::format(samples.acceptance_rate[c]) << '\n';
    }
    return out.str();
}

std::string predictive_csv(const PredictiveBand& band) {
    std::ostringstream out;
    out << "t_yr,mean,q2.5,q97.5\n";
    for (std::size_t i = 0; i < band.times.size(); ++i) {
        out << csv::format(band.times[i]) << ',' << csv::format(band.mean[i]) << ','
            << csv::format(band.lower[i]) << ',' << csv::format(band.upper[i]) << '\n';
    }
    return out.str();
}

} // namespace ledmaint
