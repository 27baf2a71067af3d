#include "toprec/engine.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace toprec {

StablePair::StablePair(int g_, int n_) : g(g_), n(n_) {
  if (g < 0 || n < 0 || 2 * g - 2 + n <= 0) throw EngineError("unstable pair (" + std::to_string(g) + "," + std::to_string(n) + ")");
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

AiryStructure::AiryStructure(const AiryStructure& o)
    : family(o.family),
      params(o.params),
      points(o.points),
      rmax(o.rmax),
      kind(o.kind),
      operators(o.operators),
      general(o.general),
      basis_eval(o.basis_eval),
      pairing(o.pairing),
      options(o.options),
      disk(o.disk) {}

AiryStructure& AiryStructure::operator=(const AiryStructure& o) {
  if (this == &o) return *this;
  family = o.family;
  params = o.params;
  points = o.points;
  rmax = o.rmax;
  kind = o.kind;
  operators = o.operators;
  general = o.general;
  basis_eval = o.basis_eval;
  pairing = o.pairing;
  options = o.options;
  disk = o.disk;
  clear_memory();
  return *this;
}

std::string AiryStructure::digest() const {
  std::string s = family;
  for (auto& [k, v] : params) s += "|" + k + "=" + v;
  s += "|";
  s += kEngineVersion;
  return fnv1a_hex(s);
}

const RecursionOperator& AiryStructure::op(int n, int m, int h) const {
  auto it = operators.find({n, m, h});
  if (it == operators.end())
    throw EngineError("missing operator (" + std::to_string(n) + "," + std::to_string(m) + "," + std::to_string(h) + ")");
  return it->second;
}

const std::map<OpKey, RecursionOperator>& AiryStructure::general_ops() const {
  if (!general.empty()) return general;
  std::lock_guard<std::recursive_mutex> lock(mu_);
  if (derived_general_.empty()) {
    if (rmax != 2) throw EngineError("general operators required for rmax > 2");
    // Set-partition normalization: the B slot carries the factor 2 of the
    // ABCD form, the others coincide.
    derived_general_[{3, 0, 0}] = op(3, 0, 0);
    derived_general_[{2, 1, 0}] = op(2, 1, 0).scaled(Scalar(2));
    derived_general_[{1, 2, 0}] = op(1, 2, 0);
    derived_general_[{1, 0, 1}] = op(1, 0, 1);
  }
  return derived_general_;
}

void AiryStructure::clear_memory() const {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  memo_.clear();
}

std::vector<std::string> canonical_labels(int n) {
  std::vector<std::string> l;
  for (int i = 1; i <= n; ++i) l.push_back("z" + std::to_string(i));
  return l;
}

std::vector<std::vector<std::vector<int>>> set_partitions(int m) {
  std::vector<std::vector<std::vector<int>>> out;
  if (m == 0) {
    out.push_back({});
    return out;
  }
  // restricted growth strings
  std::vector<int> a(m, 0);
  while (true) {
    int blocks = 0;
    for (int x : a) blocks = std::max(blocks, x + 1);
    std::vector<std::vector<int>> p(blocks);
    for (int i = 0; i < m; ++i) p[a[i]].push_back(i);
    out.push_back(std::move(p));
    int i = m - 1;
    for (; i > 0; --i) {
      int mx = 0;
      for (int j = 0; j < i; ++j) mx = std::max(mx, a[j]);
      if (a[i] <= mx) {
        ++a[i];
        for (int j = i + 1; j < m; ++j) a[j] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

namespace {

struct Accumulator {
  std::vector<std::string> labels;
  TensorBuilder builder;
  size_t generated = 0;
  size_t cap;

  Accumulator(int n, size_t cap_) : labels(canonical_labels(n)), builder(labels), cap(cap_) {}

  void charge(size_t k) {
    generated += k;
    if (cap && generated > cap)
      throw CapExceeded("enumeration cap of " + std::to_string(cap) + " exceeded");
  }

  void add(const LabeledTensor& t, const Scalar& factor) {
    LabeledTensor r = t.reorder(labels);
    for (auto& [k, v] : r.entries()) builder.add(k, factor == Scalar(1) ? v : v * factor);
  }
};

ContractOptions contract_opts(const AiryStructure& qas) {
  ContractOptions o;
  o.threads = qas.kind == Kind::complex ? 1 : qas.options.threads;
  return o;
}

void check_stable(int g, int n) {
  if (g < 0 || n < 1 || 2 * g - 2 + n <= 0)
    throw EngineError("unstable (g,n) = (" + std::to_string(g) + "," + std::to_string(n) + ")");
}

}  // namespace

std::pair<LabeledTensor, LabeledTensor> f_base(const AiryStructure& qas) {
  LabeledTensor f03 = qas.op(3, 0, 0).with_labels(canonical_labels(3), {}).materialize();
  LabeledTensor f11 = qas.op(1, 0, 1).with_labels(canonical_labels(1), {}).materialize();
  return {f03, f11};
}

LabeledTensor f_recurse_abcd(const AiryStructure& qas, int g, int n) {
  check_stable(g, n);
  if (2 * g - 2 + n == 1) {
    auto [f03, f11] = f_base(qas);
    return g == 0 ? f03 : f11;
  }
  if (qas.rmax != 2) throw EngineError("ABCD recursion requires rmax = 2");
  const auto names = canonical_labels(n);
  Accumulator acc(n, qas.options.cap);
  auto copts = contract_opts(qas);

  // B terms
  if (n >= 2) {
    const LabeledTensor& lower = qas.F(g, n - 1, Method::abcd);
    for (int i = 1; i < n; ++i) {
      RecursionOperator B = qas.op(2, 1, 0).with_labels({names[0], names[i]}, {"b"});
      std::vector<std::string> rl{"b"};
      for (int j = 1; j < n; ++j)
        if (j != i) rl.push_back(names[j]);
      acc.charge(lower.size());
      acc.add(contract(B, lower.relabel(rl), {"b"}, copts), Scalar(2));
    }
  }
  RecursionOperator C = qas.op(1, 2, 0).with_labels({names[0]}, {"b1", "b2"});
  // C term with one lower genus
  if (g >= 1) {
    const LabeledTensor& lower = qas.F(g - 1, n + 1, Method::abcd);
    std::vector<std::string> rl{"b1", "b2"};
    for (int j = 1; j < n; ++j) rl.push_back(names[j]);
    acc.charge(lower.size());
    acc.add(contract(C, lower.relabel(rl), {"b1", "b2"}, copts), Scalar(1));
  }
  // C term over stable splittings
  const int rest = n - 1;
  for (int g1 = 0; g1 <= g; ++g1) {
    int g2 = g - g1;
    for (unsigned mask = 0; mask < (1u << rest); ++mask) {
      std::vector<std::string> l1{"b1"}, l2{"b2"};
      for (int j = 0; j < rest; ++j) ((mask >> j) & 1 ? l1 : l2).push_back(names[j + 1]);
      int n1 = static_cast<int>(l1.size()), n2 = static_cast<int>(l2.size());
      if (2 * g1 - 2 + n1 <= 0 || 2 * g2 - 2 + n2 <= 0) continue;
      const LabeledTensor& a = qas.F(g1, n1, Method::abcd);
      const LabeledTensor& b = qas.F(g2, n2, Method::abcd);
      if (a.empty() || b.empty()) continue;
      acc.charge(a.size() * b.size());
      LabeledTensor prod = tensor_product(a.relabel(l1), b.relabel(l2));
      acc.add(contract(C, prod, {"b1", "b2"}, copts), Scalar(1));
    }
  }
  return acc.builder.freeze();
}

LabeledTensor f_recurse_general(const AiryStructure& qas, int g, int n) {
  check_stable(g, n);
  const auto names = canonical_labels(n);
  const auto& ops = qas.general_ops();
  Accumulator acc(n, qas.options.cap);
  auto copts = contract_opts(qas);
  const int rest = n - 1;

  for (auto& [key, base_op] : ops) {
    auto [nin, m, h] = key;
    int u = nin - 1;
    if (u > rest) continue;
    if (nin + m + 2 * h < 3 || nin + m + 2 * h > qas.rmax + 1) continue;
    std::vector<std::string> outl;
    for (int j = 0; j < m; ++j) outl.push_back("b" + std::to_string(j + 1));
    // U ranges over subsets of {z2..zn} of size u
    for (unsigned mask = 0; mask < (1u << rest); ++mask) {
      if (__builtin_popcount(mask) != u) continue;
      std::vector<std::string> inl{names[0]}, others;
      for (int j = 0; j < rest; ++j) ((mask >> j) & 1 ? inl : others).push_back(names[j + 1]);
      RecursionOperator O = base_op.with_labels(inl, outl);
      if (m == 0) {
        if (!others.empty() || g != h) continue;
        acc.add(O.materialize(), Scalar(1));
        continue;
      }
      const std::set<std::string> on(outl.begin(), outl.end());
      for (auto& part : set_partitions(m)) {
        const int ell = static_cast<int>(part.size());
        const int gsum = g + ell - m - h;
        if (gsum < 0) continue;
        const int k = static_cast<int>(others.size());
        // assignment of each remaining z to a block
        std::vector<int> assign(k, 0);
        while (true) {
          std::vector<std::vector<std::string>> blabels(ell);
          for (int i = 0; i < ell; ++i)
            for (int slot : part[i]) blabels[i].push_back(outl[slot]);
          for (int j = 0; j < k; ++j) blabels[assign[j]].push_back(others[j]);
          // genus distributions with each block stable
          std::vector<int> gs(ell, 0);
          std::function<void(int, int)> rec = [&](int i, int left) {
            if (i == ell - 1) {
              gs[i] = left;
              int sz = static_cast<int>(blabels[i].size());
              if (2 * gs[i] - 2 + sz <= 0) return;
              // all blocks set; build product
              LabeledTensor prod;
              size_t count = 1;
              for (int b = 0; b < ell; ++b) {
                const LabeledTensor& f = qas.F(gs[b], static_cast<int>(blabels[b].size()), Method::general);
                if (f.empty()) return;
                count *= f.size();
              }
              acc.charge(count);
              for (int b = 0; b < ell; ++b) {
                LabeledTensor f = qas.F(gs[b], static_cast<int>(blabels[b].size()), Method::general).relabel(blabels[b]);
                prod = b == 0 ? f : tensor_product(prod, f);
              }
              acc.add(contract(O, prod, on, copts), Scalar(1));
              return;
            }
            int sz = static_cast<int>(blabels[i].size());
            for (int gi = 0; gi <= left; ++gi) {
              if (2 * gi - 2 + sz <= 0) continue;
              gs[i] = gi;
              rec(i + 1, left - gi);
            }
          };
          rec(0, gsum);
          int pos = 0;
          while (pos < k && ++assign[pos] == ell) assign[pos++] = 0;
          if (pos == k) break;
        }
      }
    }
  }
  return acc.builder.freeze();
}

LabeledTensor compute_cell(const AiryStructure& qas, int g, int n, Method method) {
  return method == Method::abcd ? f_recurse_abcd(qas, g, n) : f_recurse_general(qas, g, n);
}

LabeledTensor AiryStructure::F(int g, int n, Method method) const {
  check_stable(g, n);
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto key = std::make_tuple(g, n, static_cast<int>(method));
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const bool use_disk = disk && method == default_method();
  if (use_disk) {
    if (auto t = disk->load(*this, g, n)) {
      memo_[key] = *t;
      return *t;
    }
  }
  LabeledTensor t = compute_cell(*this, g, n, method);
  memo_[key] = t;
  if (use_disk) disk->store(*this, g, n, t);
  return t;
}

Scalar free_energy(const AiryStructure& qas, int g) {
  if (g < 2) throw EngineError("free energy is only defined here for g >= 2");
  if (!qas.pairing) throw EngineError("family provides no pairing");
  LabeledTensor f = qas.F(g, 1);
  Scalar acc(0);
  for (auto& k : f.sorted_keys()) acc += f.at(k) * qas.pairing(k[0]);
  return acc / Scalar(2 - 2 * g);
}

Scalar omega_eval(const AiryStructure& qas, int g, int n, const std::vector<Scalar>& points) {
  return omega_eval(qas, g, n, points, qas.default_method());
}

Scalar omega_eval(const AiryStructure& qas, int g, int n, const std::vector<Scalar>& points, Method method) {
  check_stable(g, n);
  if (static_cast<int>(points.size()) != n) throw EngineError("omega_eval expects n points");
  if (!qas.basis_eval) throw EngineError("family provides no basis evaluator");
  LabeledTensor f = qas.F(g, n, method);
  // cache basis values per (slot, index)
  std::vector<std::map<Index, Scalar>> memo(n);
  Scalar acc(0);
  for (auto& k : f.sorted_keys()) {
    Scalar term = f.at(k);
    for (int i = 0; i < n; ++i) {
      auto it = memo[i].find(k[i]);
      if (it == memo[i].end()) it = memo[i].emplace(k[i], qas.basis_eval(k[i], points[i])).first;
      term *= it->second;
    }
    acc += term;
  }
  return acc;
}

// --- disk cache ---------------------------------------------------------------

std::filesystem::path DiskCache::curve_dir(const AiryStructure& qas) const { return root_ / qas.digest(); }

std::optional<LabeledTensor> DiskCache::load(const AiryStructure& qas, int g, int n) const {
  auto p = curve_dir(qas) / ("F_" + std::to_string(g) + "_" + std::to_string(n) + ".json");
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return LabeledTensor::from_json(ss.str(), qas.points);
}

void DiskCache::write_manifest(const AiryStructure& qas) const {
  using nlohmann::json;
  auto dir = curve_dir(qas);
  std::filesystem::create_directories(dir);
  json j;
  j["family"] = qas.family;
  j["parameters"] = qas.params;
  j["scalar"] = kind_name(qas.kind);
  j["engine"] = kEngineVersion;
  j["points"] = qas.points.names;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

void DiskCache::store(const AiryStructure& qas, int g, int n, const LabeledTensor& t) const {
  auto dir = curve_dir(qas);
  if (!std::filesystem::exists(dir / "manifest.json")) write_manifest(qas);
  auto p = dir / ("F_" + std::to_string(g) + "_" + std::to_string(n) + ".json");
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << t.to_json(qas.points) << "\n";
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace toprec
