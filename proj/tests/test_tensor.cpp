// test_tensor.cpp - tensor engine: factories, backward contract, guards, rng,
// optimizer. Expected values are hand-derived and stated inline.
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cogs/adam.hpp"
#include "cogs/ops.hpp"
#include "cogs/rng.hpp"
#include "cogs/tensor.hpp"

using namespace cogs;

// --- rng ---------------------------------------------------------------------

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDiverge) {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    EXPECT_LT(same, 2);
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMomentsRoughlyStandard) {
    // Monte-Carlo oracle: 10^5 draws, mean within 0.02, variance within 0.05.
    Rng r(11);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Rng, SplitIsIndependentOfParentContinuation) {
    Rng a(5);
    Rng child = a.split();
    const auto afterSplit = a.next_u64();
    Rng b(5);
    Rng child2 = b.split();
    EXPECT_EQ(child.next_u64(), child2.next_u64());
    EXPECT_EQ(afterSplit, b.next_u64());
}

TEST(Rng, StateRoundTrip) {
    Rng a(9);
    a.next_u64();
    const auto s = a.state();
    const auto x = a.next_u64();
    Rng b(0);
    b.set_state(s);
    EXPECT_EQ(b.next_u64(), x);
}

TEST(Rng, UniformIntRejectsNonPositive) {
    Rng r(1);
    EXPECT_THROW(r.uniform_int(0), value_error);
}

// --- factories & accessors ----------------------------------------------------

TEST(Tensor, FactoriesShapeAndContent) {
    auto z = Tensor::zeros({2, 3});
    EXPECT_EQ(z.numel(), 6);
    for (double v : z.values()) EXPECT_EQ(v, 0.0);

    auto f = Tensor::full({2}, 1.5);
    EXPECT_EQ(f.values()[0], 1.5);

    auto s = Tensor::scalar(4.0);
    EXPECT_EQ(s.item(), 4.0);
    EXPECT_EQ(s.rank(), 0);

    auto e = Tensor::identity(3);
    EXPECT_EQ(e.at({1, 1}), 1.0);
    EXPECT_EQ(e.at({1, 2}), 0.0);
}

TEST(Tensor, FromVectorValidatesLength) {
    EXPECT_THROW(Tensor::from_vector({2, 2}, {1.0, 2.0, 3.0}), shape_error);
}

TEST(Tensor, ItemRequiresSingleElement) {
    auto t = Tensor::zeros({2});
    EXPECT_THROW(t.item(), shape_error);
}

TEST(Tensor, ValuesMutRejectsNonLeaf) {
    auto x = Tensor::full({2}, 1.0, true);
    auto y = relu(x);
    EXPECT_THROW(y.values_mut(), graph_error);
}

TEST(Tensor, DetachDropsHistoryAndGradFlag) {
    auto x = Tensor::full({2}, 2.0, true);
    auto y = relu(x).detach();
    EXPECT_TRUE(y.is_leaf());
    EXPECT_FALSE(y.requires_grad());
    EXPECT_EQ(y.values()[0], 2.0);
}

// --- backward contract ---------------------------------------------------------

TEST(Backward, SumOfSquaresGradient) {
    // loss = sum(x^2) at x = [1, -2] -> grad [2, -4].
    auto x = Tensor::from_vector({2}, {1.0, -2.0}, true);
    auto loss = sum_all(mul(x, x));
    loss.backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
    EXPECT_DOUBLE_EQ(x.grad()[1], -4.0);
}

TEST(Backward, SumOfSoftmaxIsConstant) {
    auto x = Tensor::from_vector({3}, {0.3, -1.2, 2.0}, true);
    auto loss = sum_all(softmax_lastdim(x));
    loss.backward();
    for (double g : x.grad()) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(Backward, NonScalarRootRejected) {
    auto x = Tensor::full({2}, 1.0, true);
    auto y = relu(x);
    EXPECT_THROW(y.backward(), graph_error);
}

TEST(Backward, SecondCallWithoutRebuildErrors) {
    auto x = Tensor::full({2}, 1.0, true);
    auto loss = sum_all(mul(x, x));
    loss.backward();
    EXPECT_THROW(loss.backward(), graph_error);
}

TEST(Backward, NoGradLeafRejected) {
    auto x = Tensor::full({}, 1.0, false);
    EXPECT_THROW(x.backward(), graph_error);
}

TEST(Backward, GradsAccumulateAcrossReuse) {
    // y = x + x -> dy/dx = 2 through two concat paths.
    auto x = Tensor::full({2}, 3.0, true);
    auto loss = sum_all(add(x, x));
    loss.backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
}

TEST(Backward, ZeroGradResets) {
    auto x = Tensor::full({2}, 1.0, true);
    auto loss = sum_all(mul(x, x));
    loss.backward();
    x.zero_grad();
    EXPECT_FALSE(x.has_grad());
    auto loss2 = sum_all(mul(x, x));
    loss2.backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
}

// --- computation record ----------------------------------------------------------

TEST(ComputationRecord, TopologicalAndComplete) {
    auto a = Tensor::full({2}, 1.0, true);
    auto b = Tensor::full({2}, 2.0, true);
    auto c = mul(add(a, b), a);
    auto rec = c.computation_record();
    // ids strictly increase (creation order == topological order)
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (i > 0) {
            EXPECT_LT(rec[i - 1].id, rec[i].id);
        }
        for (auto in : rec[i].inputs) EXPECT_TRUE(seen.count(in)) << "input after consumer";
        seen.insert(rec[i].id);
    }
    EXPECT_EQ(rec.size(), 4u);  // a, b, add, mul
    EXPECT_STREQ(rec.back().op, "mul");
}

// --- finite-check guard ------------------------------------------------------------

TEST(FiniteCheck, NamesOffendingOp) {
    auto x = Tensor::from_vector({1}, {-1.0});
    FiniteCheckGuard guard;
    try {
        auto y = log_op(x);  // log(-1) = NaN
        FAIL() << "expected numeric_error";
    } catch (const numeric_error& e) {
        EXPECT_NE(std::string(e.what()).find("log"), std::string::npos);
    }
}

TEST(FiniteCheck, DisabledByDefault) {
    auto x = Tensor::from_vector({1}, {-1.0});
    auto y = log_op(x);
    EXPECT_TRUE(std::isnan(y.values()[0]));
}

// --- adam -------------------------------------------------------------------------

TEST(Adam, FirstStepMatchesClosedForm) {
    // g = 1: m-hat = v-hat = 1 after bias correction, so
    // delta = -lr / (1 + eps) = -9.99999999e-5 at lr = 1e-4.
    auto p = Tensor::from_vector({1}, {0.0}, true);
    Adam opt({p}, AdamConfig{});
    auto loss = sum_all(p);  // d(loss)/dp = 1
    loss.backward();
    opt.step();
    EXPECT_NEAR(p.values()[0], -1e-4 / (1.0 + 1e-8), 1e-15);
    EXPECT_EQ(opt.steps_taken(), 1);
}

TEST(Adam, ZeroGradLeavesParamsUnchanged) {
    auto p = Tensor::from_vector({2}, {1.0, -1.0}, true);
    Adam opt({p}, AdamConfig{});
    auto loss = sum_all(mul(p, Tensor::zeros({2})));
    loss.backward();
    opt.step();
    EXPECT_DOUBLE_EQ(p.values()[0], 1.0);
    EXPECT_DOUBLE_EQ(p.values()[1], -1.0);
}

TEST(Adam, DeterministicAcrossRuns) {
    auto run = [] {
        Rng rng(3);
        auto p = Tensor::randn({4}, rng, 1.0, true);
        Adam opt({p}, AdamConfig{.lr = 1e-2});
        for (int i = 0; i < 25; ++i) {
            auto loss = sum_all(mul(p, p));
            loss.backward();
            opt.step();
        }
        return p.values();
    };
    EXPECT_EQ(run(), run());
}

TEST(Adam, RestoreValidatesShapes) {
    auto p = Tensor::zeros({2}, true);
    Adam opt({p}, AdamConfig{});
    EXPECT_THROW(opt.restore(1, {{0.0}}, {{0.0}}), value_error);
}

TEST(Adam, ConvergesOnQuadratic) {
    // min (p - 3)^2; 4000 steps at lr 1e-2 should land close.
    auto p = Tensor::from_vector({1}, {0.0}, true);
    Adam opt({p}, AdamConfig{.lr = 1e-2});
    for (int i = 0; i < 4000; ++i) {
        auto d = add_scalar(p, -3.0);
        auto loss = sum_all(mul(d, d));
        loss.backward();
        opt.step();
    }
    EXPECT_NEAR(p.values()[0], 3.0, 1e-2);
}
