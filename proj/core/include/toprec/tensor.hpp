#pragma once

#include "toprec/scalar.hpp"

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace toprec {

class TensorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ramification point ids are small integers; families map them to names.
struct Index {
  int point = 0;
  int degree = 0;

  friend bool operator==(const Index& a, const Index& b) { return a.point == b.point && a.degree == b.degree; }
  friend bool operator!=(const Index& a, const Index& b) { return !(a == b); }
  friend bool operator<(const Index& a, const Index& b) {
    return a.point != b.point ? a.point < b.point : a.degree < b.degree;
  }
};

using IndexList = std::vector<Index>;

struct IndexListHash {
  size_t operator()(const IndexList& l) const noexcept {
    size_t h = 1469598103934665603ull;
    for (const auto& i : l) {
      h ^= static_cast<size_t>(i.point) * 0x9e3779b97f4a7c15ull + static_cast<size_t>(i.degree);
      h *= 1099511628211ull;
    }
    return h;
  }
};

using Entries = std::unordered_map<IndexList, Scalar, IndexListHash>;

// Point token table used for serialization and display.
struct PointNames {
  std::vector<std::string> names{"0"};
  const std::string& name(int id) const;
  int id(const std::string& name) const;
};

// Sparse tensor with named columns. Storage is shared and immutable;
// relabel() returns a view onto the same storage.
class LabeledTensor {
 public:
  LabeledTensor() = default;
  LabeledTensor(std::vector<std::string> labels, Entries entries);

  size_t dim() const { return labels_.size(); }
  size_t size() const { return data_ ? data_->size() : 0; }
  bool empty() const { return size() == 0; }
  const std::vector<std::string>& labels() const { return labels_; }
  int rank_of(const std::string& label) const;  // -1 when absent
  const Entries& entries() const;
  Scalar at(const IndexList& key) const;  // zero when absent
  // Value looked up by label name -> index, independent of column order.
  Scalar at_labeled(const std::vector<std::string>& names, const IndexList& key) const;
  bool same_storage(const LabeledTensor& o) const { return data_ == o.data_; }

  // New names for the columns, same storage.
  LabeledTensor relabel(std::vector<std::string> new_labels) const;
  LabeledTensor rename(const std::string& from, const std::string& to) const;
  // Materializes a copy whose columns follow the given label order.
  LabeledTensor reorder(const std::vector<std::string>& order) const;

  // Keys sorted lexicographically, for reproducible output.
  std::vector<IndexList> sorted_keys() const;

  std::string to_json(const PointNames& points) const;
  static LabeledTensor from_json(const std::string& text, const PointNames& points);

 private:
  std::vector<std::string> labels_;
  std::shared_ptr<const Entries> data_;
};

// Accumulates entries and freezes them into a LabeledTensor.
class TensorBuilder {
 public:
  explicit TensorBuilder(std::vector<std::string> labels) : labels_(std::move(labels)) {}
  void add(const IndexList& key, const Scalar& v);
  void merge(const TensorBuilder& other);
  size_t size() const { return entries_.size(); }
  LabeledTensor freeze();

 private:
  std::vector<std::string> labels_;
  Entries entries_;
};

LabeledTensor add(const LabeledTensor& a, const LabeledTensor& b);
LabeledTensor scale(const LabeledTensor& a, const Scalar& s);
LabeledTensor tensor_product(const LabeledTensor& a, const LabeledTensor& b);
LabeledTensor symmetrize(const LabeledTensor& a);

// A^(h)_{n|m}: in-columns are the tensor columns produced by contraction,
// out-columns are those paired with the argument.
struct RecursionOperator {
  int n = 1, m = 0, h = 0;
  std::vector<std::string> labels_in;
  std::vector<std::string> labels_out;
  std::function<std::vector<IndexList>(const IndexList& out)> candidates;
  std::function<Scalar(const IndexList& in, const IndexList& out)> value;

  void validate() const;
  // All entries with no out columns (m == 0), as a tensor over labels_in.
  LabeledTensor materialize() const;
  // Same operator with different column names.
  RecursionOperator with_labels(std::vector<std::string> in, std::vector<std::string> out) const;
  // Same operator with every value multiplied by s.
  RecursionOperator scaled(const Scalar& s) const;
};

struct ContractOptions {
  unsigned threads = 1;
  size_t max_terms = 0;  // 0 means unlimited
};

class CapExceeded : public TensorError {
 public:
  using TensorError::TensorError;
};

// Contracts the out-columns named in `on` with the same-named tensor columns.
LabeledTensor contract(const RecursionOperator& op, const LabeledTensor& t, const std::set<std::string>& on,
                       const ContractOptions& opts = {});

}  // namespace toprec
