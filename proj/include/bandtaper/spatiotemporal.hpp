#pragma once

#include "bandtaper/simulation.hpp"
#include "bandtaper/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace bandtaper {

/**
 * Space x time panel: one S x T grid per observational unit (grids indexed
 * (space, time)). All units share the same geometry; units with missing or
 * unparsable entries are dropped at ingestion.
 */
struct Panel {
  Eigen::Index s_count = 0;
  Eigen::Index t_count = 0;
  std::vector<Eigen::MatrixXd> units;
  std::vector<std::string> unit_ids;

  Eigen::Index size() const { return static_cast<Eigen::Index>(units.size()); }
};

/// Forecast the trailing time block: predict times t0+1..T from times 1..t0.
struct ForecastTask {
  Eigen::Index t0 = 1;
  Eigen::Index s_count = 1;
  Eigen::Index t_count = 2;

  ForecastTask(Eigen::Index t0_, Eigen::Index s, Eigen::Index t)
      : t0(t0_), s_count(s), t_count(t) {
    if (s < 1 || t < 2 || t0 < 1 || t0 >= t) {
      throw InputError("ForecastTask: need S >= 1 and 1 <= t0 < T");
    }
  }

  Eigen::Index p() const { return s_count * t_count; }
  Eigen::Index p0() const { return t0 * s_count; }
  Partition partition() const { return Partition(p(), p0()); }
};

/// Time-major, space-minor flattening:
/// (x_11, x_21, ..., x_S1, x_12, ..., x_ST) for grid entries x_st.
Eigen::VectorXd rearrange(const Eigen::MatrixXd& grid);

/// Inverse of rearrange.
Eigen::MatrixXd unrearrange(const Eigen::VectorXd& z, Eigen::Index s_count,
                            Eigen::Index t_count);

/// Subtract column means; returns the centered data and the means, so that
/// forecasts can be un-centered (and test data centered without leakage).
std::pair<DataMatrix, Eigen::RowVectorXd> center(const DataMatrix& z);

/// Mean over test rows of || C_hat x - y ||_2, where x is the leading p0
/// block and y the trailing block of each (already centered) row.
double forecast_error(const CoefMatrix& c_hat, const DataMatrix& test,
                      const ForecastTask& task);

struct ForecastRow {
  std::string method;
  double error = 0.0;
};

struct ForecastReport {
  std::vector<ForecastRow> rows;
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  std::vector<std::string> dropped_units;
  Eigen::RowVectorXd train_mean;
};

struct ForecastOptions {
  int ppp_draws = 1000;
  std::uint64_t seed = 1;
};

/**
 * Chronological first-half/second-half split (first ceil(n/2) units train),
 * centering with the train means only, one fit + forecast error per method.
 */
ForecastReport run_forecast(const Panel& panel, const ForecastTask& task,
                            const std::vector<MethodSpec>& methods,
                            const ForecastOptions& opts = {});

/**
 * Panel CSV: header `unit_id, x_s1_t1, x_s2_t1, ..., x_sS_tT` (time-major,
 * space-minor, mirroring rearrange), '.' decimal separator. Units with
 * missing or unparsable cells are dropped and listed in `dropped`.
 */
Panel read_panel_csv(const std::string& path, std::vector<std::string>* dropped);

void write_panel_csv(const std::string& path, const Panel& panel);

/// Synthetic stand-in panel: i.i.d. units from a bandable covariance in the
/// rearranged ordering.
Panel make_synthetic_panel(Eigen::Index s_count, Eigen::Index t_count,
                           Eigen::Index n_units, double rho, double alpha,
                           std::uint64_t seed);

}  // namespace bandtaper
