#include "resilience/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "resilience/csv_io.hpp"
#include "resilience/error.hpp"

namespace resilience::synth {

namespace {

using Rng = std::mt19937_64;

Rng stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return Rng(seq);
}

struct SectorInfo {
  const char* code;
  double affected_share;
};

// 3-digit NAICS sectors with illustrative affected shares
constexpr SectorInfo kSectors[] = {
    {"211", 35.0}, {"221", 30.0}, {"236", 70.0}, {"311", 62.0}, {"325", 38.0}, {"334", 25.0},
    {"336", 58.0}, {"423", 45.0}, {"441", 78.0}, {"452", 80.0}, {"481", 82.0}, {"511", 18.0},
    {"517", 22.0}, {"522", 15.0}, {"523", 12.0}, {"524", 20.0}, {"531", 48.0}, {"541", 28.0},
    {"561", 66.0}, {"621", 72.0}, {"622", 75.0}, {"713", 88.0}, {"721", 85.0}, {"722", 90.0},
};

std::string firm_code(std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i + 1);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  return "F" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

Eigen::MatrixXd symmetric_power(const Eigen::MatrixXd& m, double power) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0);
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? std::pow(d(i), power) : 0.0;
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

/// Centres the draw and maps it so that its sample correlation equals `target` exactly.
Eigen::MatrixXd match_moments(Eigen::MatrixXd x, const Eigen::MatrixXd& target) {
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows() - 1);
  return x * symmetric_power(cov, -0.5) * symmetric_power(target, 0.5);
}

Eigen::MatrixXd normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = n01(rng);
  }
  return out;
}

void validate(const SynthSpec& spec) {
  if (spec.n_firms < 5) throw Error(ErrorCode::InvalidArgument, "synthetic panel needs at least 5 firms");
  if (spec.n_months < 1) throw Error(ErrorCode::InvalidArgument, "synthetic panel needs at least one month");
  if (spec.blocks.empty()) throw Error(ErrorCode::InvalidArgument, "synthetic panel needs at least one ratio block");
  for (const auto& block : spec.blocks) {
    if (!(block.loading >= 0.0 && block.loading <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "block loadings must lie in [0, 1]");
    }
  }
  if (!(spec.monthly_noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "monthly noise must be >= 0");
  if (!(spec.missing_share >= 0.0 && spec.missing_share < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "missing share must lie in [0, 1)");
  }
}

}  // namespace

std::vector<RatioBlock> SynthSpec::default_blocks() {
  return {
      {RatioCategory::Profitability, 0, 0.75},      {RatioCategory::Valuation, 0, 0.55},
      {RatioCategory::Liquidity, 0, 0.60},          {RatioCategory::Capitalization, 0, 0.30},
      {RatioCategory::Efficiency, 0, 0.30},         {RatioCategory::FinancialSoundness, 0, 0.30},
      {RatioCategory::Other, 0, 0.30},              {RatioCategory::Solvency, 0, 0.30},
  };
}

Eigen::Matrix3d target_correlation(const CorrTriple& targets) {
  const Eigen::Vector3d c(targets[0], targets[1], targets[2]);
  const double lambda1 = c.squaredNorm();
  if (!(lambda1 > 0.0) || c.cwiseAbs().maxCoeff() >= 1.0) {
    throw Error(ErrorCode::NotPsd, "first-PC correlations must be non-zero and inside (-1, 1)");
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(c)};
  const Eigen::Matrix3d basis = qr.householderQ();
  const Eigen::Matrix<double, 3, 2> q = basis.rightCols<2>();
  // diag(c c^T + Q S Q^T) = 1 is linear in the three free entries of S
  Eigen::Matrix3d a;
  Eigen::Vector3d rhs;
  for (int j = 0; j < 3; ++j) {
    a(j, 0) = q(j, 0) * q(j, 0);
    a(j, 1) = 2.0 * q(j, 0) * q(j, 1);
    a(j, 2) = q(j, 1) * q(j, 1);
    rhs(j) = 1.0 - c(j) * c(j);
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::NotPsd, "target correlations do not determine a correlation matrix");
  const Eigen::Vector3d s = lu.solve(rhs);
  Eigen::Matrix2d sm;
  sm << s(0), s(1), s(1), s(2);
  const Eigen::Vector2d rest = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sm).eigenvalues();
  if (rest.minCoeff() < -1e-12 || rest.maxCoeff() >= lambda1) {
    throw Error(ErrorCode::NotPsd, "target correlations imply a matrix that is not PSD or whose first PC differs");
  }
  Eigen::Matrix3d r = c * c.transpose() + q * sm * q.transpose();
  r = 0.5 * (r + r.transpose()).eval();
  r.diagonal().setOnes();
  return r;
}

GeneratedPanel gen_panel(const SynthSpec& spec) {
  validate(spec);
  GeneratedPanel out;
  out.truth.r_before = target_correlation(spec.before_targets);
  out.truth.r_after = target_correlation(spec.after_targets);

  // ratio layout: each block in order, its leader first for the three target categories
  struct Column {
    std::string code;
    std::size_t block;
    bool leader;
    int target;  // 0..2 for target leaders, -1 otherwise
  };
  std::vector<Column> columns;
  const Leaders& leaders = out.truth.leaders;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& block = spec.blocks[b];
    int target = -1;
    std::string leader;
    if (block.category == RatioCategory::Profitability) {
      target = 0;
      leader = leaders.profitability;
    } else if (block.category == RatioCategory::Valuation) {
      target = 1;
      leader = leaders.valuation;
    } else if (block.category == RatioCategory::Liquidity) {
      target = 2;
      leader = leaders.liquidity;
    }
    std::vector<std::string> codes;
    if (!leader.empty()) codes.push_back(leader);
    for (const auto& info : ratio_catalog()) {
      if (info.category == block.category && info.code != leader) codes.emplace_back(info.code);
    }
    if (block.count > 0 && block.count < codes.size()) codes.resize(block.count);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      columns.push_back({codes[k], b, k == 0 && target >= 0, k == 0 ? target : -1});
    }
  }
  for (std::size_t a = 0; a < columns.size(); ++a) {
    for (std::size_t b = a + 1; b < columns.size(); ++b) {
      if (columns[a].code == columns[b].code) throw Error(ErrorCode::InvalidArgument, "ratio blocks overlap");
    }
  }

  const auto n = static_cast<Eigen::Index>(spec.n_firms);
  Rng rng = stream(spec.seed, 1);
  std::uniform_int_distribution<std::size_t> pick_sector(0, std::size(kSectors) - 1);
  std::vector<FirmId> firms;
  for (std::size_t i = 0; i < spec.n_firms; ++i) {
    firms.push_back({firm_code(i, spec.n_firms), kSectors[pick_sector(rng)].code});
  }

  // target-category latents per regime
  const Eigen::MatrixXd draw_before = normal_matrix(rng, n, 3);
  const Eigen::MatrixXd fresh = normal_matrix(rng, n, 3);
  Eigen::MatrixXd lead_before;
  Eigen::MatrixXd lead_after;
  if (spec.moment_match) {
    lead_before = match_moments(draw_before, out.truth.r_before);
    const Eigen::MatrixXd white = match_moments(draw_before, Eigen::Matrix3d::Identity());
    lead_after = match_moments(0.8 * white + 0.6 * fresh, out.truth.r_after);
  } else {
    const Eigen::Matrix3d lb = out.truth.r_before.llt().matrixL();
    const Eigen::Matrix3d la = out.truth.r_after.llt().matrixL();
    lead_before = draw_before * lb.transpose();
    lead_after = (0.8 * draw_before + 0.6 * fresh) * la.transpose();
  }
  const auto n_blocks = static_cast<Eigen::Index>(spec.blocks.size());
  const Eigen::MatrixXd block_before = normal_matrix(rng, n, n_blocks);
  const Eigen::MatrixXd block_after = 0.8 * block_before + 0.6 * normal_matrix(rng, n, n_blocks);

  // per-ratio regime levels
  const auto n_cols = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd level_before(n, n_cols);
  Eigen::MatrixXd level_after(n, n_cols);
  const Eigen::MatrixXd idio_before = normal_matrix(rng, n, n_cols);
  const Eigen::MatrixXd idio_after = 0.8 * idio_before + 0.6 * normal_matrix(rng, n, n_cols);
  for (Eigen::Index j = 0; j < n_cols; ++j) {
    const auto& col = columns[static_cast<std::size_t>(j)];
    const auto& block = spec.blocks[col.block];
    const auto b = static_cast<Eigen::Index>(col.block);
    if (col.target >= 0) {
      level_before.col(j) = lead_before.col(col.target);
      level_after.col(j) = lead_after.col(col.target);
      out.truth.loadings[col.code] = 1.0;
      continue;
    }
    // members of a target block load on their leader; other blocks on a shared latent
    Eigen::VectorXd lat_before = block_before.col(b);
    Eigen::VectorXd lat_after = block_after.col(b);
    for (const auto& other : columns) {
      if (other.block == col.block && other.target >= 0) {
        lat_before = lead_before.col(other.target);
        lat_after = lead_after.col(other.target);
      }
    }
    const double a = block.loading;
    const double e = std::sqrt(std::max(0.0, 1.0 - a * a));
    level_before.col(j) = a * lat_before + e * idio_before.col(j);
    level_after.col(j) = a * lat_after + e * idio_after.col(j);
    out.truth.loadings[col.code] = a;
  }

  std::vector<std::string> codes;
  for (const auto& col : columns) codes.push_back(col.code);
  out.truth.ratios = codes;
  std::vector<YearMonth> months;
  YearMonth ym = spec.first_month;
  for (std::size_t t = 0; t < spec.n_months; ++t, ym = ym.next()) months.push_back(ym);
  out.panel = RatioPanel(firms, codes, months);

  std::normal_distribution<double> n01;
  std::chi_squared_distribution<double> chi3(3.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const YearMonth switch_month{2020, 1};
  for (std::size_t f = 0; f < spec.n_firms; ++f) {
    const auto fi = static_cast<Eigen::Index>(f);
    for (std::size_t r = 0; r < columns.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const double center = 0.05 * static_cast<double>((r * 7) % 11) - 0.2;
      const double scale = 0.5 + 0.25 * static_cast<double>(r % 4);
      for (std::size_t t = 0; t < months.size(); ++t) {
        double eps = n01(rng);
        if (spec.heavy_tail) eps *= std::sqrt(1.0 / chi3(rng));  // t(3) has variance 3
        const bool after = !(months[t] < switch_month);
        const double level = after ? level_after(fi, ri) : level_before(fi, ri);
        const double v = center + scale * (level + spec.monthly_noise * eps);
        if (spec.missing_share > 0.0 && u01(rng) < spec.missing_share) continue;
        out.panel.set(f, r, t, v);
      }
    }
  }
  return out;
}

long double oracle_pv(long double r, long double b, long double g, const EpsTriple& eps) {
  const long double d = 1.0L + r;
  const long double e0 = eps[0];
  const long double e1 = eps[1];
  const long double e2 = eps[2];
  const long double numerator = (e0 * d + e1) * d + e2 + (1.0L + g) * e2 / (r - g);
  return b * numerator / (d * d * d);
}

double oracle_dr(double price, double b, double g, const EpsTriple& eps) {
  if (!(price > 0.0) || !(b > 0.0 && b <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "oracle_dr needs price > 0 and b in (0, 1]");
  }
  auto f = [&](long double r) { return oracle_pv(r, b, g, eps) - static_cast<long double>(price); };
  const long double lo = static_cast<long double>(g) + 1e-6L;
  const long double hi = 10.0L;
  const long double step = 1e-4L;
  long double a = lo;
  long double fa = f(a);
  long double bracket_lo = 0.0L;
  long double bracket_hi = 0.0L;
  bool found = false;
  for (std::size_t k = 1; a < hi; ++k) {
    long double next = lo + step * static_cast<long double>(k);
    if (next > hi) next = hi;
    const long double fn = f(next);
    if (fa >= 0.0L && fn <= 0.0L) {
      bracket_lo = a;
      bracket_hi = next;
      found = true;
      break;
    }
    a = next;
    fa = fn;
  }
  if (!found) throw Error(ErrorCode::NoRoot, "no price-matching rate on the scan grid");

  const long double inv_phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double x1 = bracket_hi - inv_phi * (bracket_hi - bracket_lo);
  long double x2 = bracket_lo + inv_phi * (bracket_hi - bracket_lo);
  long double f1 = std::fabs(f(x1));
  long double f2 = std::fabs(f(x2));
  for (int iter = 0; iter < 400 && bracket_hi - bracket_lo > 1e-18L * (1.0L + std::fabs(bracket_lo)); ++iter) {
    if (f1 < f2) {
      bracket_hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = bracket_hi - inv_phi * (bracket_hi - bracket_lo);
      f1 = std::fabs(f(x1));
    } else {
      bracket_lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = bracket_lo + inv_phi * (bracket_hi - bracket_lo);
      f2 = std::fabs(f(x2));
    }
  }
  const long double r = 0.5L * (bracket_lo + bracket_hi);
  if (std::fabs(f(r)) > 1e-10L * price) throw Error(ErrorCode::NoRoot, "refinement did not reach the residual bound");
  return static_cast<double>(r);
}

OracleEigen oracle_eigen(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  double scale = 0.0;
  for (const auto& row : matrix) {
    if (row.size() != n) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(matrix[i][j] - matrix[j][i]) > 1e-12 * std::max(1.0, scale)) {
        throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
      }
    }
  }
  std::vector<std::vector<double>> a = matrix;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  OracleEigen out;
  for (std::size_t sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (std::sqrt(off) < 1e-14 * std::max(1.0, scale)) break;
    out.sweeps = sweep + 1;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  for (std::size_t k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

OracleEigen oracle_eigen(const Eigen::MatrixXd& matrix) {
  std::vector<std::vector<double>> m(static_cast<std::size_t>(matrix.rows()),
                                     std::vector<double>(static_cast<std::size_t>(matrix.cols())));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = matrix(i, j);
  }
  return oracle_eigen(m);
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
  if (spec.price_last < spec.price_first) throw Error(ErrorCode::InvalidArgument, "price window is empty");
  SyntheticDataset data;
  data.seed = spec.panel.seed;
  data.ratios = gen_panel(spec.panel);
  const auto& firms = data.ratios.panel.firms();

  Rng rng = stream(spec.panel.seed, 2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01;
  std::map<std::string, double> share_of;
  for (const auto& s : kSectors) {
    share_of.emplace(s.code, s.affected_share);
    data.sector_g.emplace(s.code, 0.01 + 0.04 * u01(rng));
  }

  for (YearMonth m = spec.price_first; !(spec.price_last < m); m = m.next()) data.price_months.push_back(m);
  const YearMonth shock{2020, 3};

  std::vector<ForecastEntry> forecasts;
  std::vector<FundamentalsRow> fundamentals;
  std::vector<PriceRow> prices;
  std::map<std::string, double> realized;
  for (const auto& firm : firms) {
    const double share = share_of.at(firm.sector);
    const double g = data.sector_g.at(firm.sector);
    data.affected.emplace(firm.id, share);
    const bool zero_payout = u01(rng) < spec.zero_payout_share;
    const double b = zero_payout ? 0.0 : 0.2 + 0.7 * u01(rng);
    const double e_base = 1.0 + 5.0 * u01(rng);
    const double growth = 0.08 * u01(rng);
    const double drop = std::clamp(0.5 * share / 100.0 * (1.0 + 0.2 * n01(rng)), 0.0, 0.9);
    const double r_base = 0.06 + 0.06 * u01(rng);
    const double bump = 0.04 * share / 100.0;
    const double sales0 = 50.0 + 450.0 * u01(rng);
    const double income0 = 5.0 + 45.0 * u01(rng);
    data.payout.emplace(firm.id, b);

    for (int y = 2010; y <= 2019; ++y) {
      FundamentalsRow row;
      row.firm = firm.id;
      row.year = y;
      row.net_income = income0 * (1.0 + 0.03 * (y - 2010));
      row.dividends = b * row.net_income * 0.6;
      row.repurchases = b * row.net_income - row.dividends;
      row.sales = sales0 * (1.0 + g * (y - 2015));
      fundamentals.push_back(row);
    }

    std::vector<double> r_path;
    for (const YearMonth m : data.price_months) {
      const int since = m.ordinal() - shock.ordinal();
      const double stress = since < 0 ? 0.0 : std::max(0.3, 1.0 - since / 24.0);
      EpsTriple eps{};
      for (int h = m.year; h <= m.year + 4; ++h) {
        const double covid = h >= 2022 ? 0.5 * stress : stress;
        double e = e_base * std::pow(1.0 + growth, h - 2019) * (1.0 - drop * covid);
        e *= 1.0 + 0.01 * n01(rng);
        forecasts.push_back({firm.id, Date{m.year, m.month, 15}, h, e});
        if (h == 2019) realized[firm.id] = e;
        if (h - m.year < 3) eps[static_cast<std::size_t>(h - m.year)] = e;
      }
      const double decay = since < 0 ? 0.0 : std::max(0.0, 1.0 - since / 18.0);
      const double r = std::max(r_base + bump * decay + 0.002 * n01(rng), g + 0.02);
      const double price_b = zero_payout ? 0.5 : b;
      prices.push_back({firm.id, m, static_cast<double>(oracle_pv(r, price_b, g, eps))});
      r_path.push_back(r);
    }
    if (!zero_payout) data.r_star.emplace(firm.id, std::move(r_path));
  }
  data.forecasts = ForecastPanel(std::move(forecasts), std::move(realized));
  data.fundamentals = Fundamentals(std::move(fundamentals));
  data.prices = PricePanel(std::move(prices));
  return data;
}

nlohmann::json SyntheticDataset::truth_json() const {
  using nlohmann::json;
  json out;
  out["seed"] = seed;
  out["leaders"] = {{"profitability", ratios.truth.leaders.profitability},
                    {"valuation", ratios.truth.leaders.valuation},
                    {"liquidity", ratios.truth.leaders.liquidity}};
  auto matrix = [](const Eigen::Matrix3d& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
  };
  out["correlation_before"] = matrix(ratios.truth.r_before);
  out["correlation_after"] = matrix(ratios.truth.r_after);
  out["ratio_loadings"] = ratios.truth.loadings;
  out["sector_growth"] = sector_g;
  out["payout"] = payout;
  json months = json::array();
  for (const auto& m : price_months) months.push_back(m.to_string());
  out["price_months"] = months;
  out["r_star"] = r_star;
  return out;
}

void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
  write_file(dir / "ratios.csv", format_ratio_panel(data.ratios.panel));
  write_file(dir / "affected.csv", format_affected_shares(data.affected));
  write_file(dir / "forecasts.csv", format_forecasts(data.forecasts));
  write_file(dir / "fundamentals.csv", format_fundamentals(data.fundamentals));
  write_file(dir / "prices.csv", format_prices(data.prices));
  write_file(dir / "truth.json", data.truth_json().dump(2) + "\n");
}

}  // namespace resilience::synth
