#include "toprec/tensor.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <thread>

namespace toprec {

const std::string& PointNames::name(int id) const {
  if (id < 0 || id >= static_cast<int>(names.size())) throw TensorError("unknown point id " + std::to_string(id));
  return names[id];
}

int PointNames::id(const std::string& n) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return static_cast<int>(i);
  throw TensorError("unknown point token '" + n + "'");
}

namespace {

void check_unique(const std::vector<std::string>& labels) {
  std::set<std::string> s(labels.begin(), labels.end());
  if (s.size() != labels.size()) throw TensorError("duplicate label");
}

const Entries& empty_entries() {
  static const Entries e;
  return e;
}

}  // namespace

LabeledTensor::LabeledTensor(std::vector<std::string> labels, Entries entries) : labels_(std::move(labels)) {
  check_unique(labels_);
  for (auto it = entries.begin(); it != entries.end();) {
    if (it->first.size() != labels_.size()) throw TensorError("key dimension does not match label count");
    if (it->second.is_zero())
      it = entries.erase(it);
    else
      ++it;
  }
  data_ = std::make_shared<const Entries>(std::move(entries));
}

int LabeledTensor::rank_of(const std::string& label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

const Entries& LabeledTensor::entries() const { return data_ ? *data_ : empty_entries(); }

Scalar LabeledTensor::at(const IndexList& key) const {
  auto& e = entries();
  auto it = e.find(key);
  return it == e.end() ? Scalar(0) : it->second;
}

Scalar LabeledTensor::at_labeled(const std::vector<std::string>& names, const IndexList& key) const {
  if (names.size() != dim() || key.size() != dim()) throw TensorError("label lookup dimension mismatch");
  IndexList k(dim());
  for (size_t i = 0; i < names.size(); ++i) {
    int r = rank_of(names[i]);
    if (r < 0) throw TensorError("unknown label " + names[i]);
    k[r] = key[i];
  }
  return at(k);
}

LabeledTensor LabeledTensor::relabel(std::vector<std::string> new_labels) const {
  if (new_labels.size() != labels_.size()) throw TensorError("relabel dimension mismatch");
  check_unique(new_labels);
  LabeledTensor t;
  t.labels_ = std::move(new_labels);
  t.data_ = data_ ? data_ : std::make_shared<const Entries>();
  return t;
}

LabeledTensor LabeledTensor::rename(const std::string& from, const std::string& to) const {
  auto l = labels_;
  int r = rank_of(from);
  if (r < 0) throw TensorError("unknown label " + from);
  l[r] = to;
  return relabel(std::move(l));
}

LabeledTensor LabeledTensor::reorder(const std::vector<std::string>& order) const {
  if (order.size() != dim()) throw TensorError("reorder dimension mismatch");
  std::vector<int> src(order.size());
  bool identity = true;
  for (size_t i = 0; i < order.size(); ++i) {
    src[i] = rank_of(order[i]);
    if (src[i] < 0) throw TensorError("unknown label " + order[i]);
    identity = identity && src[i] == static_cast<int>(i);
  }
  if (identity) return *this;
  Entries out;
  out.reserve(size());
  for (auto& [k, v] : entries()) {
    IndexList nk(k.size());
    for (size_t i = 0; i < k.size(); ++i) nk[i] = k[src[i]];
    out.emplace(std::move(nk), v);
  }
  return LabeledTensor(order, std::move(out));
}

std::vector<IndexList> LabeledTensor::sorted_keys() const {
  std::vector<IndexList> keys;
  keys.reserve(size());
  for (auto& kv : entries()) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string LabeledTensor::to_json(const PointNames& points) const {
  using nlohmann::json;
  json j;
  j["labels"] = labels_;
  json arr = json::array();
  for (auto& k : sorted_keys()) {
    json idx = json::array();
    for (auto& i : k) idx.push_back({points.name(i.point), i.degree});
    arr.push_back({{"idx", idx}, {"value", json::parse(at(k).to_json())}});
  }
  j["entries"] = arr;
  return j.dump();
}

LabeledTensor LabeledTensor::from_json(const std::string& text, const PointNames& points) {
  using nlohmann::json;
  try {
    json j = json::parse(text);
    std::vector<std::string> labels = j.at("labels");
    Entries e;
    for (auto& ent : j.at("entries")) {
      IndexList k;
      for (auto& p : ent.at("idx")) k.push_back(Index{points.id(p.at(0).get<std::string>()), p.at(1).get<int>()});
      Scalar v = Scalar::from_json(ent.at("value").dump());
      if (!e.emplace(std::move(k), std::move(v)).second) throw TensorError("duplicate key in tensor json");
    }
    return LabeledTensor(std::move(labels), std::move(e));
  } catch (const TensorError&) {
    throw;
  } catch (const std::exception& ex) {
    throw TensorError(std::string("bad tensor json: ") + ex.what());
  }
}

void TensorBuilder::add(const IndexList& key, const Scalar& v) {
  if (v.is_zero()) return;
  auto [it, inserted] = entries_.try_emplace(key, v);
  if (!inserted) it->second += v;
}

void TensorBuilder::merge(const TensorBuilder& other) {
  if (other.labels_ != labels_) throw TensorError("builder label mismatch");
  for (auto& [k, v] : other.entries_) add(k, v);
}

LabeledTensor TensorBuilder::freeze() {
  // Shared variant: promote embedded rationals if any entry is wider.
  Kind widest = Kind::rational;
  int cyc = 2;
  unsigned prec = kDefaultPrecision;
  for (auto& [k, v] : entries_) {
    if (v.kind() != Kind::rational) {
      widest = v.kind();
      if (widest == Kind::cyclotomic) cyc = v.cyclotomic().r;
      if (widest == Kind::complex) prec = v.complex_ap().prec;
    }
  }
  if (widest != Kind::rational)
    for (auto& [k, v] : entries_)
      if (v.kind() == Kind::rational) v = v.promote(widest, cyc, prec);
  LabeledTensor t(std::move(labels_), std::move(entries_));
  entries_.clear();
  return t;
}

LabeledTensor add(const LabeledTensor& a, const LabeledTensor& b) {
  std::set<std::string> la(a.labels().begin(), a.labels().end()), lb(b.labels().begin(), b.labels().end());
  if (la != lb) throw TensorError("add requires identical label sets");
  LabeledTensor bb = b.reorder(a.labels());
  TensorBuilder out(a.labels());
  for (auto& [k, v] : a.entries()) out.add(k, v);
  for (auto& [k, v] : bb.entries()) out.add(k, v);
  return out.freeze();
}

LabeledTensor scale(const LabeledTensor& a, const Scalar& s) {
  TensorBuilder out(a.labels());
  for (auto& [k, v] : a.entries()) out.add(k, v * s);
  return out.freeze();
}

LabeledTensor tensor_product(const LabeledTensor& a, const LabeledTensor& b) {
  auto labels = a.labels();
  for (auto& l : b.labels()) {
    if (a.rank_of(l) >= 0) throw TensorError("label collision in tensor product: " + l);
    labels.push_back(l);
  }
  TensorBuilder out(labels);
  for (auto& [ka, va] : a.entries())
    for (auto& [kb, vb] : b.entries()) {
      IndexList k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      out.add(k, va * vb);
    }
  return out.freeze();
}

LabeledTensor symmetrize(const LabeledTensor& a) {
  std::vector<int> perm(a.dim());
  std::iota(perm.begin(), perm.end(), 0);
  TensorBuilder out(a.labels());
  Integer count = 0;
  do {
    ++count;
    for (auto& [k, v] : a.entries()) {
      IndexList nk(k.size());
      for (size_t i = 0; i < k.size(); ++i) nk[i] = k[perm[i]];
      out.add(nk, v);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  LabeledTensor s = out.freeze();
  return scale(s, Scalar(Rational(1, count)));
}

void RecursionOperator::validate() const {
  if (n < 1 || n + m + 2 * h < 3) throw TensorError("inadmissible operator signature");
  if (static_cast<int>(labels_in.size()) != n || static_cast<int>(labels_out.size()) != m)
    throw TensorError("operator label count mismatch");
  if (!candidates || !value) throw TensorError("operator missing candidates or value");
}

LabeledTensor RecursionOperator::materialize() const {
  if (m != 0) throw TensorError("materialize requires an operator without out columns");
  TensorBuilder out(labels_in);
  IndexList none;
  for (auto& in : candidates(none)) out.add(in, value(in, none));
  return out.freeze();
}

RecursionOperator RecursionOperator::with_labels(std::vector<std::string> in, std::vector<std::string> out) const {
  RecursionOperator o = *this;
  o.labels_in = std::move(in);
  o.labels_out = std::move(out);
  o.validate();
  return o;
}

RecursionOperator RecursionOperator::scaled(const Scalar& s) const {
  RecursionOperator o = *this;
  auto base = value;
  o.value = [base, s](const IndexList& in, const IndexList& out) { return base(in, out) * s; };
  return o;
}

LabeledTensor contract(const RecursionOperator& op, const LabeledTensor& t, const std::set<std::string>& on,
                       const ContractOptions& opts) {
  if (on.empty()) throw TensorError("no labels to contract");
  std::vector<int> out_cols(op.labels_out.size());
  std::set<std::string> out_set(op.labels_out.begin(), op.labels_out.end());
  for (auto& l : on) {
    if (!out_set.count(l)) throw TensorError("contracted label is not an operator out label: " + l);
    if (t.rank_of(l) < 0) throw TensorError("unknown label " + l);
  }
  for (size_t j = 0; j < op.labels_out.size(); ++j) {
    if (!on.count(op.labels_out[j])) throw TensorError("dangling operator out label: " + op.labels_out[j]);
    out_cols[j] = t.rank_of(op.labels_out[j]);
  }
  std::vector<std::string> labels = op.labels_in;
  std::vector<int> keep;
  for (size_t c = 0; c < t.dim(); ++c) {
    if (on.count(t.labels()[c])) continue;
    for (auto& l : op.labels_in)
      if (l == t.labels()[c]) throw TensorError("label collision: " + l);
    keep.push_back(static_cast<int>(c));
    labels.push_back(t.labels()[c]);
  }

  std::vector<const std::pair<const IndexList, Scalar>*> items;
  items.reserve(t.size());
  for (auto& kv : t.entries()) items.push_back(&kv);

  auto work = [&](size_t begin, size_t end, TensorBuilder& out) {
    IndexList outkey(op.labels_out.size());
    for (size_t i = begin; i < end; ++i) {
      const auto& [k, v] = *items[i];
      for (size_t j = 0; j < out_cols.size(); ++j) outkey[j] = k[out_cols[j]];
      for (auto& in : op.candidates(outkey)) {
        Scalar w = op.value(in, outkey);
        if (w.is_zero()) continue;
        IndexList key = in;
        for (int c : keep) key.push_back(k[c]);
        out.add(key, w * v);
        if (opts.max_terms && out.size() > opts.max_terms)
          throw CapExceeded("contraction exceeded the configured cap of " + std::to_string(opts.max_terms) + " terms");
      }
    }
  };

  unsigned threads = std::max(1u, opts.threads);
  if (threads == 1 || items.size() < 64) {
    TensorBuilder out(labels);
    work(0, items.size(), out);
    return out.freeze();
  }
  std::vector<TensorBuilder> parts(threads, TensorBuilder(labels));
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  size_t chunk = (items.size() + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    size_t b = std::min(items.size(), w * chunk), e = std::min(items.size(), b + chunk);
    pool.emplace_back([&, w, b, e] {
      try {
        work(b, e, parts[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  TensorBuilder out(labels);
  for (auto& p : parts) out.merge(p);
  return out.freeze();
}

}  // namespace toprec
