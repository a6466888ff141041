#include "bandtaper/spatiotemporal.hpp"

#include "bandtaper/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace bandtaper {

Eigen::VectorXd rearrange(const Eigen::MatrixXd& grid) {
  const Eigen::Index s = grid.rows(), t = grid.cols();
  Eigen::VectorXd z(s * t);
  for (Eigen::Index ti = 0; ti < t; ++ti) {
    z.segment(ti * s, s) = grid.col(ti);
  }
  return z;
}

Eigen::MatrixXd unrearrange(const Eigen::VectorXd& z, Eigen::Index s_count,
                            Eigen::Index t_count) {
  if (z.size() != s_count * t_count) {
    throw InputError("unrearrange: vector length != S*T");
  }
  Eigen::MatrixXd grid(s_count, t_count);
  for (Eigen::Index ti = 0; ti < t_count; ++ti) {
    grid.col(ti) = z.segment(ti * s_count, s_count);
  }
  return grid;
}

std::pair<DataMatrix, Eigen::RowVectorXd> center(const DataMatrix& z) {
  if (z.rows() < 1) throw InputError("center: need at least one row");
  const Eigen::RowVectorXd mean = z.colwise().mean();
  return {z.rowwise() - mean, mean};
}

double forecast_error(const CoefMatrix& c_hat, const DataMatrix& test,
                      const ForecastTask& task) {
  const Eigen::Index p0 = task.p0(), p = task.p();
  if (test.rows() < 1) throw InputError("forecast_error: empty test data");
  if (test.cols() != p) throw InputError("forecast_error: test columns != S*T");
  if (c_hat.rows() != p - p0 || c_hat.cols() != p0) {
    throw InputError("forecast_error: coefficient shape mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    const Eigen::VectorXd x = test.row(i).head(p0);
    const Eigen::VectorXd y = test.row(i).tail(p - p0);
    acc += (c_hat * x - y).norm();
  }
  return acc / static_cast<double>(test.rows());
}

ForecastReport run_forecast(const Panel& panel, const ForecastTask& task,
                            const std::vector<MethodSpec>& methods,
                            const ForecastOptions& opts) {
  if (panel.s_count != task.s_count || panel.t_count != task.t_count) {
    throw InputError("run_forecast: panel geometry != task geometry");
  }
  const Eigen::Index n = panel.size();
  if (n < 2) throw InputError("run_forecast: need at least 2 units");
  if (methods.empty()) throw InputError("run_forecast: no methods");
  const Eigen::Index p = task.p();
  const Partition part = task.partition();

  DataMatrix z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    z.row(i) = rearrange(panel.units[i]);
  }
  const Eigen::Index n_train = (n + 1) / 2;
  const Eigen::Index n_test = n - n_train;

  auto [train_c, mean] = center(z.topRows(n_train));
  const DataMatrix test_c = z.bottomRows(n_test).rowwise() - mean;

  const CovMatrix s = sample_covariance(train_c);

  ForecastReport report;
  report.n_train = n_train;
  report.n_test = n_test;
  report.train_mean = mean;

  std::vector<std::size_t> ppp_idx;
  std::vector<PppTransform> transforms;
  report.rows.resize(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const MethodSpec& spec = methods[m];
    if (spec.tuned) {
      throw InputError("run_forecast: supply tuned parameters explicitly "
                       "(run the tune command first)");
    }
    report.rows[m].method = spec.label();
    if (is_ppp_family(spec.family)) {
      ppp_idx.push_back(m);
      switch (spec.family) {
        case MethodFamily::kTaperingPpp:
          transforms.push_back(
              PppTransform::tapering(spec.fixed.k, spec.fixed.epsilon, part));
          break;
        case MethodFamily::kBlockwisePpp:
          transforms.push_back(PppTransform::blockwise(
              spec.fixed.k, spec.fixed.a, spec.fixed.epsilon, part));
          break;
        default:
          transforms.push_back(
              PppTransform::banding(spec.fixed.k, spec.fixed.epsilon, part));
      }
    } else {
      const CoefMatrix c = detail::fit_point(spec.family, spec.fixed, s, part);
      report.rows[m].error = forecast_error(c, test_c, task);
    }
  }

  if (!ppp_idx.empty()) {
    const IWParams post = iw_posterior(IWParams::default_prior(p), train_c);
    const auto means = ppp_means(post, transforms, opts.ppp_draws, opts.seed);
    for (std::size_t t = 0; t < ppp_idx.size(); ++t) {
      report.rows[ppp_idx[t]].error = forecast_error(means[t], test_c, task);
    }
  }
  return report;
}

namespace {

/// Expected header token for 1-based (s, t).
std::string cell_name(Eigen::Index s, Eigen::Index t) {
  return "x_s" + std::to_string(s) + "_t" + std::to_string(t);
}

}  // namespace

Panel read_panel_csv(const std::string& path,
                     std::vector<std::string>* dropped) {
  const auto rows = csv::read_rows(path);
  if (rows.empty()) throw InputError("panel CSV " + path + ": empty file");
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "unit_id") {
    throw InputError("panel CSV " + path +
                     ": header must start with unit_id followed by cells");
  }
  // Geometry from the last header token x_sS_tT.
  Eigen::Index s_count = 0, t_count = 0;
  {
    const std::string& last = header.back();
    if (std::sscanf(last.c_str(), "x_s%ld_t%ld", &s_count, &t_count) != 2 ||
        s_count < 1 || t_count < 1) {
      throw InputError("panel CSV " + path + ": malformed header token '" +
                       last + "'");
    }
  }
  if (static_cast<Eigen::Index>(header.size()) != s_count * t_count + 1) {
    throw InputError("panel CSV " + path + ": expected " +
                     std::to_string(s_count * t_count) + " cells per unit");
  }
  std::size_t col = 1;
  for (Eigen::Index t = 1; t <= t_count; ++t) {
    for (Eigen::Index s = 1; s <= s_count; ++s, ++col) {
      if (header[col] != cell_name(s, t)) {
        throw InputError("panel CSV " + path + ": header column " +
                         std::to_string(col + 1) + " is '" + header[col] +
                         "', expected '" + cell_name(s, t) +
                         "' (time-major, space-minor)");
      }
    }
  }

  Panel panel;
  panel.s_count = s_count;
  panel.t_count = t_count;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::string id = cells.empty() ? "(unnamed)" : cells[0];
    if (static_cast<Eigen::Index>(cells.size()) != s_count * t_count + 1) {
      if (dropped) dropped->push_back(id + ": wrong cell count");
      continue;
    }
    Eigen::VectorXd z(s_count * t_count);
    bool ok = true;
    for (Eigen::Index c = 0; c < s_count * t_count; ++c) {
      const std::string& cell = cells[c + 1];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() ||
          !std::isfinite(v)) {
        if (dropped) {
          dropped->push_back(id + ": non-numeric cell '" + cell + "'");
        }
        ok = false;
        break;
      }
      z(c) = v;
    }
    if (!ok) continue;
    panel.units.push_back(unrearrange(z, s_count, t_count));
    panel.unit_ids.push_back(id);
  }
  return panel;
}

void write_panel_csv(const std::string& path, const Panel& panel) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << "unit_id";
  for (Eigen::Index t = 1; t <= panel.t_count; ++t) {
    for (Eigen::Index s = 1; s <= panel.s_count; ++s) {
      out << "," << cell_name(s, t);
    }
  }
  out << "\n";
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    out << panel.unit_ids[i];
    const Eigen::VectorXd z = rearrange(panel.units[i]);
    for (Eigen::Index c = 0; c < z.size(); ++c) {
      out << "," << csv::format_double(z(c), 17);
    }
    out << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

Panel make_synthetic_panel(Eigen::Index s_count, Eigen::Index t_count,
                           Eigen::Index n_units, double rho, double alpha,
                           std::uint64_t seed) {
  const Eigen::Index p = s_count * t_count;
  const CovMatrix sigma = make_sigma0({p, rho, alpha, 0.5});
  CounterRng rng(seed, derive_stream({stream_tag::kPanel}));
  const DataMatrix z = sample_gaussian(sigma, n_units, rng);
  Panel panel;
  panel.s_count = s_count;
  panel.t_count = t_count;
  for (Eigen::Index i = 0; i < n_units; ++i) {
    panel.units.push_back(unrearrange(z.row(i), s_count, t_count));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "unit%04ld", static_cast<long>(i + 1));
    panel.unit_ids.emplace_back(buf);
  }
  return panel;
}

}  // namespace bandtaper
