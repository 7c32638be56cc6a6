// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ukiyo {

/// n faces x d features with row ids and optional class labels.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }

  /// Throws NonFiniteValue / DimensionMismatch when invariants fail.
  void validate() const;
};

/// Reads a feature CSV (face_id then numeric columns).
FeatureMatrix read_feature_csv(std::istream& in);

/// Column-wise z-scoring; constant columns are only centered.
FeatureMatrix standardize(const FeatureMatrix& x);

enum class ProjectionMethod { Pca, Lda };

/// y = (x - mean) * components. For PCA `strengths` holds the explained
/// variances, for LDA the discriminant eigenvalues, both decreasing.
struct LinearProjection {
  ProjectionMethod method = ProjectionMethod::Pca;
  Eigen::VectorXd mean;        // d
  Eigen::MatrixXd components;  // d x k, one direction per column
  Eigen::VectorXd strengths;   // k
  double total_variance = 0.0; // PCA only: trace of the sample covariance

  Eigen::Index input_dim() const noexcept { return components.rows(); }
  Eigen::Index output_dim() const noexcept { return components.cols(); }
};

struct Embedding {
  Eigen::MatrixXd coords;  // n x k
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;
  std::string method;
  std::map<std::string, std::string> params;
};

/// Top-k principal directions of the centered data (right singular vectors),
/// ordered by decreasing variance. Each direction's largest-magnitude entry
/// is made positive. Requires n >= 2 and 1 <= k <= min(n - 1, d); throws
/// RankDeficient if k exceeds the numerical rank.
LinearProjection pca_fit(const FeatureMatrix& x, int k);

/// Fisher discriminant directions from (Sw + eps I)^-1 Sb with
/// eps = 1e-6 trace(Sw) / d, unit-normalized, same sign convention as PCA.
/// Needs labels, >= 2 classes each with >= 2 rows, and k <= classes - 1.
LinearProjection lda_fit(const FeatureMatrix& x, int k);

/// Projects rows; throws DimensionMismatch if the column count differs.
Embedding project(const FeatureMatrix& x, const LinearProjection& projection);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
};

struct TsneResult {
  Embedding embedding;  // k = 2
  double initial_kl = 0.0;
  double final_kl = 0.0;
};

/// Exact O(n^2) t-SNE. Requires n >= 5 and 1 < perplexity < (n - 1) / 3.
TsneResult tsne_embed(const FeatureMatrix& x, const TsneOptions& options);

/// Row-conditional affinities matched to `perplexity` by bisection on the
/// Gaussian precision, then symmetrized: P = (P + P^T) / 2n.
Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& x, double perplexity);

/// KL(P || Q) for the Student-t kernel of embedding `y`.
double tsne_kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y);

/// Header face_id,x,y[,label]; extra dimensions are named c2, c3, ...
void write_embedding_csv(std::ostream& out, const Embedding& embedding);

/// JSON document {"d", "k", "method", "params", "mean", "components",
/// "strengths", "total_variance"}; components stored row-major d x k.
void write_projection_json(std::ostream& out, const LinearProjection& projection,
                           const std::map<std::string, std::string>& params = {});
LinearProjection read_projection_json(std::istream& in);

}  // namespace ukiyo
