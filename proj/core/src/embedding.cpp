// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "ukiyo/csv.hpp"
#include "ukiyo/error.hpp"

namespace ukiyo {
namespace {

// The largest-magnitude entry of every column becomes positive; the first
// such entry wins ties.
void fix_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index c = 0; c < components.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < components.rows(); ++r) {
      if (std::abs(components(r, c)) > std::abs(components(best, c))) best = r;
    }
    if (components(best, c) < 0.0) components.col(c) = -components.col(c);
  }
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& x) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) mean += x.row(r).transpose();
  return mean / static_cast<double>(x.rows());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void FeatureMatrix::validate() const {
  if (static_cast<Eigen::Index>(ids.size()) != values.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix has " + std::to_string(values.rows()) + " rows but " +
                                                  std::to_string(ids.size()) + " ids");
  }
  if (labels && static_cast<Eigen::Index>(labels->size()) != values.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match the row count");
  }
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (!std::isfinite(values(r, c))) {
        throw Error(ErrorKind::NonFiniteValue, "row " + ids[r] + ", column " + std::to_string(c) + " is not finite");
      }
    }
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) throw Error(ErrorKind::MalformedRecord, "feature CSV is empty");
  const auto d = static_cast<Eigen::Index>(rows[0].fields.size()) - 1;
  if (d < 1) throw Error(ErrorKind::MalformedRecord, "feature CSV needs an id column and at least one feature");
  FeatureMatrix m;
  m.values.resize(static_cast<Eigen::Index>(rows.size()) - 1, d);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto where = "feature CSV line " + std::to_string(rows[r].line) + ": ";
    if (static_cast<Eigen::Index>(f.size()) != d + 1) {
      throw Error(ErrorKind::DimensionMismatch, where + "expected " + std::to_string(d + 1) + " fields");
    }
    m.ids.push_back(f[0]);
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto& cell = f[static_cast<std::size_t>(c) + 1];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw Error(ErrorKind::MalformedRecord, where + "non-numeric value \"" + cell + "\"");
      }
      m.values(static_cast<Eigen::Index>(r) - 1, c) = v;
    }
  }
  m.validate();
  return m;
}

FeatureMatrix standardize(const FeatureMatrix& x) {
  x.validate();
  FeatureMatrix out = x;
  if (x.rows() == 0) return out;
  const Eigen::VectorXd mean = column_mean(x.values);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.values.col(c).array() -= mean(c);
    const double var = x.rows() > 1 ? out.values.col(c).squaredNorm() / static_cast<double>(x.rows() - 1) : 0.0;
    if (var > 0.0) out.values.col(c) /= std::sqrt(var);
  }
  return out;
}

LinearProjection pca_fit(const FeatureMatrix& x, int k) {
  x.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw Error(ErrorKind::TooFewPoints, "PCA needs at least 2 rows");
  if (k < 1 || k > std::min(n - 1, d)) {
    throw Error(ErrorKind::InvalidArgument, "PCA dimension k=" + std::to_string(k) + " outside [1, min(n-1, d)=" +
                                                std::to_string(std::min(n - 1, d)) + "]");
  }

  LinearProjection proj;
  proj.method = ProjectionMethod::Pca;
  proj.mean = column_mean(x.values);
  const Eigen::MatrixXd centered = x.values.rowwise() - proj.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon() *
                     (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += (s(i) > tol && s(i) > 0.0) ? 1 : 0;
  if (k > rank) {
    throw Error(ErrorKind::RankDeficient,
                "PCA dimension k=" + std::to_string(k) + " exceeds numerical rank " + std::to_string(rank));
  }

  const double dof = static_cast<double>(n - 1);
  proj.components = svd.matrixV().leftCols(k);
  fix_signs(proj.components);
  proj.strengths = s.head(k).array().square() / dof;
  proj.total_variance = s.squaredNorm() / dof;
  return proj;
}

LinearProjection lda_fit(const FeatureMatrix& x, int k) {
  x.validate();
  if (!x.labels) throw Error(ErrorKind::TooFewClasses, "LDA needs class labels");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  std::map<std::string, std::vector<Eigen::Index>> members;
  for (Eigen::Index r = 0; r < n; ++r) members[(*x.labels)[r]].push_back(r);
  if (members.size() < 2) throw Error(ErrorKind::TooFewClasses, "LDA needs at least 2 classes");
  for (const auto& [label, rows] : members) {
    if (rows.size() < 2) {
      throw Error(ErrorKind::DegenerateClass, "class \"" + label + "\" has fewer than 2 samples");
    }
  }
  const int classes = static_cast<int>(members.size());
  if (k < 1 || k > classes - 1) {
    throw Error(ErrorKind::TooFewClasses, "LDA dimension k=" + std::to_string(k) + " needs k <= classes - 1 = " +
                                              std::to_string(classes - 1));
  }

  const Eigen::VectorXd mean = column_mean(x.values);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [label, rows] : members) {
    Eigen::VectorXd class_mean = Eigen::VectorXd::Zero(d);
    for (auto r : rows) class_mean += x.values.row(r).transpose();
    class_mean /= static_cast<double>(rows.size());
    for (auto r : rows) {
      const Eigen::VectorXd dev = x.values.row(r).transpose() - class_mean;
      within.noalias() += dev * dev.transpose();
    }
    const Eigen::VectorXd shift = class_mean - mean;
    between.noalias() += static_cast<double>(rows.size()) * shift * shift.transpose();
  }

  const double trace = within.trace();
  const double ridge = trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
  within.diagonal().array() += ridge;

  const Eigen::LLT<Eigen::MatrixXd> chol(within);
  if (chol.info() != Eigen::Success) throw Error(ErrorKind::DegenerateClass, "within-class scatter is not positive definite");
  const auto lower = chol.matrixL();
  // Whitened problem L^-1 Sb L^-T w = lambda w, direction a = L^-T w.
  Eigen::MatrixXd tmp = lower.solve(between);
  Eigen::MatrixXd whitened = lower.solve(tmp.transpose());
  whitened = 0.5 * (whitened + whitened.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(whitened);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::DegenerateClass, "LDA eigendecomposition failed");

  LinearProjection proj;
  proj.method = ProjectionMethod::Lda;
  proj.mean = mean;
  proj.components.resize(d, k);
  proj.strengths.resize(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = d - 1 - i;  // eigenvalues ascend
    Eigen::VectorXd dir = lower.transpose().solve(eig.eigenvectors().col(src));
    dir.normalize();
    proj.components.col(i) = dir;
    proj.strengths(i) = eig.eigenvalues()(src);
  }
  fix_signs(proj.components);
  return proj;
}

Embedding project(const FeatureMatrix& x, const LinearProjection& projection) {
  x.validate();
  if (x.cols() != projection.input_dim() || projection.mean.size() != projection.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "features have " + std::to_string(x.cols()) +
                                                  " columns, projection expects " +
                                                  std::to_string(projection.input_dim()));
  }
  Embedding out;
  out.coords = (x.values.rowwise() - projection.mean.transpose()) * projection.components;
  out.ids = x.ids;
  out.labels = x.labels;
  out.method = projection.method == ProjectionMethod::Pca ? "pca" : "lda";
  out.params["k"] = std::to_string(projection.output_dim());
  return out;
}

Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& x, double perplexity) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }

  constexpr double kTolerance = 1e-5;
  constexpr int kMaxBisections = 50;
  const double target = std::log(perplexity);
  Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) min_dist = std::min(min_dist, dist(i, j));
    }
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < kMaxBisections; ++step) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * (dist(i, j) - min_dist));
        sum += row(j);
        weighted += (dist(i, j) - min_dist) * row(j);
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      row /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kTolerance) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    cond.row(i) = row.transpose();
  }

  Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = i == j ? 0.0 : std::max(p(i, j), 1e-12);
  }
  return p;
}

namespace {

// Student-t numerators 1 / (1 + |yi - yj|^2), zero diagonal; returns their sum.
double student_kernel(const Eigen::MatrixXd& y, Eigen::MatrixXd& num) {
  const Eigen::Index n = y.rows();
  num.resize(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      num(i, j) = v;
      num(j, i) = v;
      total += 2.0 * v;
    }
  }
  return total;
}

}  // namespace

double tsne_kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd num;
  const double total = student_kernel(y, num);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(num(i, j) / total, 1e-12);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

TsneResult tsne_embed(const FeatureMatrix& x, const TsneOptions& options) {
  x.validate();
  const Eigen::Index n = x.rows();
  if (n < 5) throw Error(ErrorKind::TooFewPoints, "t-SNE needs at least 5 points, got " + std::to_string(n));
  const double max_perplexity = static_cast<double>(n - 1) / 3.0;
  if (!(options.perplexity > 1.0)) throw Error(ErrorKind::InvalidArgument, "perplexity must exceed 1");
  if (options.perplexity >= max_perplexity) {
    throw Error(ErrorKind::PerplexityTooLarge, "perplexity " + format_double(options.perplexity) +
                                                   " must be below (n - 1) / 3 = " + format_double(max_perplexity));
  }
  if (options.iterations < 0) throw Error(ErrorKind::InvalidArgument, "iteration count must be >= 0");

  const Eigen::MatrixXd p = tsne_affinities(x.values, options.perplexity);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = gauss(rng);
    y(i, 1) = gauss(rng);
  }

  TsneResult result;
  result.initial_kl = tsne_kl_divergence(p, y);

  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd grad(n, 2);
  Eigen::MatrixXd num;
  constexpr double kMinGain = 0.01;

  for (int it = 0; it < options.iterations; ++it) {
    const bool early = it < options.exaggeration_iterations;
    const double exaggeration = early ? options.early_exaggeration : 1.0;
    const double momentum = early ? options.initial_momentum : options.final_momentum;

    const double total = student_kernel(y, num);
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / total, 1e-12);
        const double coeff = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
        grad(i, 0) += coeff * (y(i, 0) - y(j, 0));
        grad(i, 1) += coeff * (y(i, 1) - y(j, 1));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        double& g = gains(i, c);
        g = (grad(i, c) > 0.0) != (update(i, c) > 0.0) ? g + 0.2 : g * 0.8;
        g = std::max(g, kMinGain);
        update(i, c) = momentum * update(i, c) - options.learning_rate * g * grad(i, c);
      }
    }
    y += update;
    const Eigen::RowVector2d center = y.colwise().mean();
    y.rowwise() -= center;
  }

  result.final_kl = tsne_kl_divergence(p, y);
  result.embedding.coords = y;
  result.embedding.ids = x.ids;
  result.embedding.labels = x.labels;
  result.embedding.method = "tsne";
  result.embedding.params = {{"perplexity", format_double(options.perplexity)},
                             {"iterations", std::to_string(options.iterations)},
                             {"seed", std::to_string(options.seed)},
                             {"learning_rate", format_double(options.learning_rate)},
                             {"early_exaggeration", format_double(options.early_exaggeration)}};
  return result;
}

void write_embedding_csv(std::ostream& out, const Embedding& embedding) {
  const Eigen::Index k = embedding.coords.cols();
  std::vector<std::string> header{"face_id"};
  for (Eigen::Index c = 0; c < k; ++c) {
    header.push_back(c == 0 ? "x" : c == 1 ? "y" : "c" + std::to_string(c));
  }
  if (embedding.labels) header.push_back("label");
  csv::write_row(out, header);
  for (Eigen::Index r = 0; r < embedding.coords.rows(); ++r) {
    std::vector<std::string> fields{embedding.ids[r]};
    for (Eigen::Index c = 0; c < k; ++c) fields.push_back(format_double(embedding.coords(r, c)));
    if (embedding.labels) fields.push_back((*embedding.labels)[r]);
    csv::write_row(out, fields);
  }
}

void write_projection_json(std::ostream& out, const LinearProjection& projection,
                           const std::map<std::string, std::string>& params) {
  nlohmann::json doc;
  doc["d"] = projection.input_dim();
  doc["k"] = projection.output_dim();
  doc["method"] = projection.method == ProjectionMethod::Pca ? "pca" : "lda";
  doc["params"] = params;
  doc["mean"] = std::vector<double>(projection.mean.data(), projection.mean.data() + projection.mean.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < projection.components.rows(); ++r) {
    std::vector<double> row(projection.components.cols());
    for (Eigen::Index c = 0; c < projection.components.cols(); ++c) row[c] = projection.components(r, c);
    rows.push_back(row);
  }
  doc["components"] = std::move(rows);
  doc["strengths"] =
      std::vector<double>(projection.strengths.data(), projection.strengths.data() + projection.strengths.size());
  doc["total_variance"] = projection.total_variance;
  out << doc.dump(2) << '\n';
}

LinearProjection read_projection_json(std::istream& in) {
  LinearProjection proj;
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto k = doc.at("k").get<Eigen::Index>();
    const auto method = doc.at("method").get<std::string>();
    if (method != "pca" && method != "lda") throw Error(ErrorKind::MalformedRecord, "unknown projection method " + method);
    proj.method = method == "pca" ? ProjectionMethod::Pca : ProjectionMethod::Lda;
    const auto mean = doc.at("mean").get<std::vector<double>>();
    const auto rows = doc.at("components").get<std::vector<std::vector<double>>>();
    const auto strengths = doc.at("strengths").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(rows.size()) != d ||
        static_cast<Eigen::Index>(strengths.size()) != k) {
      throw Error(ErrorKind::DimensionMismatch, "projection file sizes disagree with its header");
    }
    proj.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
    proj.components.resize(d, k);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != k) {
        throw Error(ErrorKind::DimensionMismatch, "projection row " + std::to_string(r) + " has wrong length");
      }
      for (Eigen::Index c = 0; c < k; ++c) proj.components(r, c) = rows[r][c];
    }
    proj.strengths = Eigen::Map<const Eigen::VectorXd>(strengths.data(), k);
    proj.total_variance = doc.value("total_variance", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("projection file: ") + e.what());
  }
  return proj;
}

}  // namespace ukiyo
