#pragma once

// Affine illuminance surrogate: working-plane lux as a linear function of
// the luminaire output-scaling vector Q = 1 - L.

#include "ledmaint/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ledmaint {

struct Luminaire {
    int id = 0;
    std::string type_tag;
    double x = 0.0, y = 0.0, z = 0.0; // m
    double intensity = 0.0;           // cd
};

struct GridPoint {
    double x = 0.0, y = 0.0; // m
};

struct Layout {
    std::vector<Luminaire> luminaires;
    std::vector<GridPoint> grid;
    double h_wp = 0.8;          // working-plane height, m
    double ambient_floor = 0.0; // lux

    std::size_t J() const { return luminaires.size(); }
    std::size_t N() const { return grid.size(); }

    /// Throws DomainError on an empty layout, a luminaire at or below the
    /// working plane, or a negative intensity / ambient term.
    void validate() const;
};

struct CaseStudyOptions {
    double target_e_avg = 600.0; // lux for the brand-new system (1.2 S_E)
    double ambient_floor = 20.0;
    double grid_spacing = 1.0;
    double d13_to_b7_ratio = 1.25; // relative nominal intensity
};

/// 65.38 x 6.80 x 3.55 m corridor zone, 57.73 x 4.80 m working plane at
/// 0.80 m centred in it and sampled at the cell centres of a regular grid,
/// one ceiling row of 46 B7 and one of 30 D13 luminaires. A global intensity
/// scale is set by bisection so the new system averages target_e_avg.
Layout case_study_layout(const CaseStudyOptions& options = {});

/// N x J influence matrix G with E = ambient + G Q: G_ij = I_j h_j / d_ij^3.
Eigen::MatrixXd influence_matrix(const Layout& layout);

/// Point-source oracle E_i = ambient + sum_j Q_j I_j h_j / d_ij^3.
Eigen::VectorXd analytic_oracle(const Layout& layout, const Eigen::VectorXd& q);

/// Row-wise oracle over an n x J state matrix; returns n x N.
Eigen::MatrixXd analytic_oracle_batch(const Layout& layout, const Eigen::MatrixXd& states,
                                      Execution execution = Execution::parallel);

/// Largest dimension the Sobol direction numbers support.
std::size_t sobol_max_dimension();

/// First n points of the J-dimensional Sobol sequence, origin included.
/// With `scramble` every coordinate gets a nested-uniform (Owen) scramble
/// keyed by (seed, dimension); the result lies in [0, 1).
Eigen::MatrixXd sobol_states(std::size_t n, std::size_t J, std::uint64_t seed, bool scramble = true);

class SurrogateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SurrogateModel {
    Eigen::VectorXd intercept;    // N
    Eigen::MatrixXd coefficients; // N x J

    std::size_t J() const { return static_cast<std::size_t>(coefficients.cols()); }
    std::size_t N() const { return static_cast<std::size_t>(coefficients.rows()); }

    Eigen::VectorXd predict(const Eigen::VectorXd& q) const;
    /// Stacked form 1 b^T + Q C^T for a K x J matrix.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& states) const;
};

/// Ordinary least squares of each illuminance column on [1, Q] through a
/// column-pivoted QR. Rank deficiency raises SurrogateError naming the
/// columns the pivoting dropped. Negative coefficients smaller than 1e-9 of
/// their column maximum are clipped to 0.
SurrogateModel fit_surrogate(const Eigen::MatrixXd& states, const Eigen::MatrixXd& illum);

/// 1 - SSE / SST pooled over every entry of the holdout matrix.
double holdout_r2(const SurrogateModel& model, const Eigen::MatrixXd& states,
                  const Eigen::MatrixXd& illum);

/// max |pred - obs| / |obs| over the holdout (|obs| floored at 1e-300).
double max_relative_error(const SurrogateModel& model, const Eigen::MatrixXd& states,
                          const Eigen::MatrixXd& illum);

struct TrainingPairs {
    Eigen::MatrixXd states; // n x J
    Eigen::MatrixXd illum;  // n x N
};

// File formats. The layout file has [plane], [luminaires] and [grid]
// sections; training pairs use a `q_1..q_J,e_1..e_N` header; the surrogate
// file carries an 8-line header with J, N and a CRC-32 of the body.
std::string layout_text(const Layout& layout);
Layout read_layout(const std::filesystem::path& path);
std::string pairs_csv(const TrainingPairs& pairs);
TrainingPairs read_pairs(const std::filesystem::path& path);
std::string surrogate_text(const SurrogateModel& model);
SurrogateModel read_surrogate(const std::filesystem::path& path);

} // namespace ledmaint
