#pragma once

#include "toprec/tensor.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>

namespace toprec {

inline constexpr const char* kEngineVersion = "toprec-1.0";

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoleError : public EngineError {
 public:
  using EngineError::EngineError;
};

struct StablePair {
  int g = 0;
  int n = 1;
  StablePair(int g_, int n_);
  int level() const { return 2 * g - 2 + n; }
};

using OpKey = std::tuple<int, int, int>;  // (n, m, h)

enum class Method { abcd, general };

struct EngineOptions {
  unsigned threads = 1;
  size_t cap = 1000000;  // max generated product entries per (g, n)
};

class DiskCache;

struct AiryStructure {
  AiryStructure() = default;
  AiryStructure(const AiryStructure& o);
  AiryStructure& operator=(const AiryStructure& o);

  std::string family;
  std::map<std::string, std::string> params;  // canonical parameter strings
  PointNames points;
  int rmax = 2;
  Kind kind = Kind::rational;

  // Operators in the family's published normalization (A, B, C, D for r = 2).
  std::map<OpKey, RecursionOperator> operators;
  // Operators normalized for the set-partition form of the general recursion.
  // When empty and rmax == 2 they are derived from `operators`.
  std::map<OpKey, RecursionOperator> general;

  // d xi_alpha(z) / dz in the family's coordinate.
  std::function<Scalar(const Index&, const Scalar& z)> basis_eval;
  // Lambda[alpha] pairing F_{g,1} with F_{0,1}.
  std::function<Scalar(const Index&)> pairing;

  EngineOptions options;
  std::shared_ptr<DiskCache> disk;

  std::string digest() const;
  Method default_method() const { return rmax == 2 ? Method::abcd : Method::general; }
  const RecursionOperator& op(int n, int m, int h) const;
  const std::map<OpKey, RecursionOperator>& general_ops() const;

  // Memoized F_{g,n}; labels z1..zn.
  LabeledTensor F(int g, int n) const { return F(g, n, default_method()); }
  LabeledTensor F(int g, int n, Method method) const;
  void clear_memory() const;

 private:
  mutable std::recursive_mutex mu_;
  mutable std::map<std::tuple<int, int, int>, LabeledTensor> memo_;
  mutable std::map<OpKey, RecursionOperator> derived_general_;
  friend LabeledTensor compute_cell(const AiryStructure&, int, int, Method);
};

std::vector<std::string> canonical_labels(int n);

std::pair<LabeledTensor, LabeledTensor> f_base(const AiryStructure& qas);
LabeledTensor f_recurse_abcd(const AiryStructure& qas, int g, int n);
LabeledTensor f_recurse_general(const AiryStructure& qas, int g, int n);
Scalar free_energy(const AiryStructure& qas, int g);
Scalar omega_eval(const AiryStructure& qas, int g, int n, const std::vector<Scalar>& points);
Scalar omega_eval(const AiryStructure& qas, int g, int n, const std::vector<Scalar>& points, Method method);

// Enumerates set partitions of {0..m-1}; each block lists its elements.
std::vector<std::vector<std::vector<int>>> set_partitions(int m);

// On-disk layout: <root>/<digest>/F_<g>_<n>.json and manifest.json.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path curve_dir(const AiryStructure& qas) const;
  std::optional<LabeledTensor> load(const AiryStructure& qas, int g, int n) const;
  void store(const AiryStructure& qas, int g, int n, const LabeledTensor& t) const;
  void write_manifest(const AiryStructure& qas) const;

 private:
  std::filesystem::path root_;
};

std::string fnv1a_hex(const std::string& s);

}  // namespace toprec
