#include <gtest/gtest.h>

#include "toprec/tensor.hpp"

#include <random>

using namespace toprec;

namespace {

LabeledTensor rank1(int d, long v, const std::string& label) {
  Entries e;
  e[{Index{0, d}}] = Scalar(v);
  return LabeledTensor({label}, std::move(e));
}

// B-type Airy operator used in the contraction examples.
RecursionOperator airy_b() {
  RecursionOperator op;
  op.n = 2;
  op.m = 1;
  op.labels_in = {"z1", "z2"};
  op.labels_out = {"beta"};
  op.candidates = [](const IndexList& out) {
    std::vector<IndexList> c;
    for (int d0 = 0; d0 <= out[0].degree + 1; ++d0) c.push_back({Index{0, d0}, Index{0, out[0].degree + 1 - d0}});
    return c;
  };
  op.value = [](const IndexList& in, const IndexList& out) {
    auto df = [](long n) { return Scalar(Rational(double_factorial(n))); };
    int d1 = in[0].degree, d2 = in[1].degree, d3 = out[0].degree;
    if (d1 + d2 != d3 + 1) return Scalar(0);
    return Scalar::frac(-1, 4) * df(2 * d3 + 1) / (df(2 * d1 + 1) * df(2 * d2 - 1));
  };
  return op;
}

LabeledTensor random_tensor(std::mt19937& rng, const std::vector<std::string>& labels, int maxdeg) {
  std::uniform_int_distribution<int> deg(0, maxdeg), val(-5, 5), cnt(0, 6);
  Entries e;
  int count = cnt(rng);
  for (int i = 0; i < count; ++i) {
    IndexList k;
    for (size_t j = 0; j < labels.size(); ++j) k.push_back(Index{0, deg(rng)});
    e[k] = Scalar::frac(val(rng), 1 + (val(rng) + 5));
  }
  return LabeledTensor(labels, std::move(e));
}

}  // namespace

TEST(Tensor, AdditiveInverseIsEmpty) {
  std::mt19937 rng(1);
  auto t = random_tensor(rng, {"a", "b"}, 3);
  EXPECT_TRUE(add(t, scale(t, Scalar(-1))).empty());
  auto s = scale(t, Scalar(1));
  EXPECT_EQ(s.size(), t.size());
  for (auto& [k, v] : t.entries()) EXPECT_EQ(s.at(k), v);
}

TEST(Tensor, OuterProduct) {
  auto p = tensor_product(rank1(0, 2, "x"), rank1(1, 3, "y"));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.at({Index{0, 0}, Index{0, 1}}), Scalar(6));
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"x", "y"}));
  EXPECT_THROW(tensor_product(rank1(0, 2, "x"), rank1(1, 3, "x")), TensorError);
}

TEST(Tensor, NoZerosStored) {
  Entries e;
  e[{Index{0, 0}}] = Scalar(0);
  e[{Index{0, 1}}] = Scalar(1);
  LabeledTensor t({"a"}, std::move(e));
  EXPECT_EQ(t.size(), 1u);
  TensorBuilder b({"a"});
  b.add({Index{0, 2}}, Scalar(1));
  b.add({Index{0, 2}}, Scalar(-1));
  EXPECT_TRUE(b.freeze().empty());
}

TEST(Tensor, RelabelSharesStorage) {
  std::mt19937 rng(2);
  auto t = random_tensor(rng, {"a", "b"}, 3);
  auto r = t.relabel({"c", "d"});
  EXPECT_TRUE(r.same_storage(t));
  EXPECT_THROW(t.relabel({"c", "c"}), TensorError);
}

TEST(Tensor, AddAlignsColumnsByName) {
  Entries e1, e2;
  e1[{Index{0, 0}, Index{0, 1}}] = Scalar(1);
  e2[{Index{0, 1}, Index{0, 0}}] = Scalar(2);
  LabeledTensor a({"x", "y"}, e1), b({"y", "x"}, e2);
  auto s = add(a, b);
  EXPECT_EQ(s.at({Index{0, 0}, Index{0, 1}}), Scalar(3));
  EXPECT_THROW(add(a, LabeledTensor({"x", "z"}, e1)), TensorError);
}

TEST(Contract, AiryBExample) {
  Entries e;
  e[{Index{0, 0}, Index{0, 0}, Index{0, 0}}] = Scalar::frac(-1, 2);
  LabeledTensor f03({"beta", "z3", "z4"}, e);
  auto r = contract(airy_b(), f03, {"beta"});
  EXPECT_EQ(r.labels(), (std::vector<std::string>{"z1", "z2", "z3", "z4"}));
  EXPECT_EQ(r.size(), 2u);
  EXPECT_EQ(airy_b().value({Index{0, 0}, Index{0, 1}}, {Index{0, 0}}), Scalar::frac(-1, 4));
  EXPECT_EQ(r.at({Index{0, 0}, Index{0, 1}, Index{0, 0}, Index{0, 0}}), Scalar::frac(1, 8));
  EXPECT_EQ(r.at({Index{0, 1}, Index{0, 0}, Index{0, 0}, Index{0, 0}}), Scalar::frac(1, 24));  // B[1,0|0] = -1/12
}

TEST(Contract, EmptyTensorGivesEmpty) {
  LabeledTensor t({"beta", "q"}, {});
  EXPECT_TRUE(contract(airy_b(), t, {"beta"}).empty());
}

TEST(Contract, Preconditions) {
  std::mt19937 rng(3);
  auto t = random_tensor(rng, {"beta", "q"}, 2);
  EXPECT_THROW(contract(airy_b(), t, {}), TensorError);
  EXPECT_THROW(contract(airy_b(), t, {"q"}), TensorError);
  EXPECT_THROW(contract(airy_b(), t.rename("beta", "gamma"), {"beta"}), TensorError);
  EXPECT_THROW(contract(airy_b(), t.rename("q", "z1"), {"beta"}), TensorError);
}

TEST(Contract, LinearityProperty) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> c(-4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    auto t1 = random_tensor(rng, {"beta", "q"}, 3);
    auto t2 = random_tensor(rng, {"beta", "q"}, 3);
    Scalar a(c(rng)), b = Scalar::frac(c(rng), 3);
    auto lhs = contract(airy_b(), add(scale(t1, a), scale(t2, b)), {"beta"});
    auto rhs = add(scale(contract(airy_b(), t1, {"beta"}), a), scale(contract(airy_b(), t2, {"beta"}), b));
    ASSERT_TRUE(add(lhs, scale(rhs, Scalar(-1))).empty()) << trial;
  }
}

TEST(Contract, RelabelEquivariance) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_tensor(rng, {"beta", "q", "w"}, 3);
    auto direct = contract(airy_b(), t, {"beta"});
    // rename the contracted column on both sides, and permute the others
    auto op = airy_b().with_labels({"z1", "z2"}, {"gamma"});
    auto t2 = t.relabel({"gamma", "w2", "q2"});
    auto other = contract(op, t2, {"gamma"});
    for (auto& [k, v] : direct.entries()) {
      // direct columns: z1 z2 q w ; other columns: z1 z2 w2 q2 with w2 = old q
      ASSERT_EQ(other.at({k[0], k[1], k[2], k[3]}), v);
    }
    ASSERT_EQ(direct.size(), other.size());
  }
}

TEST(Contract, ThreadCountDoesNotChangeResult) {
  std::mt19937 rng(13);
  Entries e;
  for (int i = 0; i < 300; ++i) e[{Index{0, i % 7}, Index{0, i / 7}}] = Scalar::frac(i + 1, 3);
  LabeledTensor t({"beta", "q"}, e);
  ContractOptions one, four;
  four.threads = 4;
  auto a = contract(airy_b(), t, {"beta"}, one);
  auto b = contract(airy_b(), t, {"beta"}, four);
  EXPECT_EQ(a.to_json(PointNames{}), b.to_json(PointNames{}));
}

TEST(Contract, CapIsEnforced) {
  Entries e;
  for (int i = 0; i < 10; ++i) e[{Index{0, i}}] = Scalar(1);
  LabeledTensor t({"beta"}, e);
  ContractOptions o;
  o.max_terms = 5;
  EXPECT_THROW(contract(airy_b(), t, {"beta"}, o), CapExceeded);
}

TEST(Tensor, JsonRoundTrip) {
  PointNames pts;
  pts.names = {"-1", "+1"};
  Entries e;
  e[{Index{1, 2}, Index{0, 0}}] = Scalar::frac(3, 128);
  e[{Index{0, 1}, Index{1, 0}}] = Scalar::frac(-1, 16);
  LabeledTensor t({"z1", "z2"}, e);
  std::string js = t.to_json(pts);
  auto back = LabeledTensor::from_json(js, pts);
  EXPECT_EQ(back.to_json(pts), js);
  EXPECT_NE(js.find("[\"+1\",2]"), std::string::npos);
}

TEST(Tensor, Symmetrize) {
  Entries e;
  e[{Index{0, 0}, Index{0, 1}}] = Scalar(2);
  auto s = symmetrize(LabeledTensor({"a", "b"}, e));
  EXPECT_EQ(s.at({Index{0, 0}, Index{0, 1}}), Scalar(1));
  EXPECT_EQ(s.at({Index{0, 1}, Index{0, 0}}), Scalar(1));
}
