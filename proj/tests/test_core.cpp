#include <doctest.h>

#include <limits>

#include "srcl/core.hpp"
#include "test_util.hpp"

using namespace srcl;
using srcl::test::random_matrix;
using srcl::test::random_vector;

TEST_CASE("validate_problem accepts matching dimensions") {
    std::mt19937_64 rng(1);
    Dictionary dict(random_matrix(4, 10, rng), random_vector(10, rng));
    FeatureVector y(random_vector(4, rng));
    CHECK_NOTHROW(validate_problem(y, dict));
}

TEST_CASE("validate_problem rejects a length mismatch") {
    std::mt19937_64 rng(2);
    Dictionary dict(random_matrix(5, 10, rng), random_vector(10, rng));
    FeatureVector y(random_vector(4, rng));
    CHECK_THROWS_CODE(validate_problem(y, dict), ErrorCode::DimensionMismatch);
}

TEST_CASE("non-finite entries are rejected") {
    Vector v(3);
    v << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
    CHECK_THROWS_CODE(FeatureVector(v), ErrorCode::NonFiniteData);
    v[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_CODE(FeatureVector(v), ErrorCode::NonFiniteData);

    Matrix atoms = Matrix::Ones(2, 3);
    atoms(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_CODE(Dictionary(atoms, Vector::Zero(3)), ErrorCode::NonFiniteData);
    Vector g = Vector::Zero(3);
    g[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_CODE(Dictionary(Matrix::Ones(2, 3), g), ErrorCode::NonFiniteData);
}

TEST_CASE("dictionary shape invariants") {
    CHECK_THROWS_CODE(Dictionary(Matrix::Ones(3, 1), Vector::Ones(1)), ErrorCode::EmptyDictionary);
    CHECK_THROWS_CODE(Dictionary(Matrix::Ones(3, 4), Vector::Ones(3)), ErrorCode::DimensionMismatch);
    CHECK_THROWS_CODE(FeatureVector(Vector()), ErrorCode::DimensionMismatch);
    Dictionary d(Matrix::Ones(3, 2), Vector::LinSpaced(2, 0.2, 0.9));
    CHECK(d.size() == 2);
    CHECK(d.dimension() == 3);
    CHECK(d.min_grade() == 0.2);
    CHECK(d.max_grade() == 0.9);
}

TEST_CASE("property: random dictionaries either validate or throw the documented code") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const Index m = srcl::test::uniform_index(rng, 1, 6);
        const Index n = srcl::test::uniform_index(rng, 1, 6);
        const Index ym = srcl::test::uniform_index(rng, 1, 6);
        Matrix atoms = random_matrix(m, n, rng);
        const bool poison = srcl::test::uniform_index(rng, 0, 4) == 0;
        if (poison) atoms(0, 0) = std::numeric_limits<double>::quiet_NaN();
        try {
            Dictionary dict(atoms, random_vector(n, rng));
            CHECK(n >= 2);
            CHECK_FALSE(poison);
            CHECK(dict.atoms().allFinite());
            if (ym == m) {
                CHECK_NOTHROW(validate_problem(FeatureVector(random_vector(ym, rng)), dict));
            } else {
                CHECK_THROWS_CODE(validate_problem(FeatureVector(random_vector(ym, rng)), dict),
                                  ErrorCode::DimensionMismatch);
            }
        } catch (const Error& e) {
            CHECK((n < 2 || poison));
            CHECK((e.code() == ErrorCode::EmptyDictionary || e.code() == ErrorCode::NonFiniteData));
        }
    }
}

TEST_CASE("support is the set of entries above epsilon and recomputation is idempotent") {
    Vector w(5);
    w << 0.0, 1e-11, -2e-10, 0.5, -1e-10;
    SparseCoefficients c(w);
    REQUIRE(c.support_size() == 2);
    CHECK(c.support()[0] == 2);
    CHECK(c.support()[1] == 3);

    Vector masked = Vector::Zero(5);
    for (Index i : c.support()) masked[i] = w[i];
    CHECK(compute_support(masked) == c.support());

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Vector r = random_vector(8, rng, 1e-10);
        SparseCoefficients a(r);
        SparseCoefficients b(a.weights());
        CHECK(a.support() == b.support());
        for (Index i = 0; i < r.size(); ++i) {
            const bool in = std::find(a.support().begin(), a.support().end(), i) != a.support().end();
            CHECK(in == (std::abs(r[i]) > kSupportEpsilon));
        }
    }
}

TEST_CASE("group partition invariants") {
    auto p = GroupPartition::with_default_weights({{0, 2}, {1}, {3, 4, 5}}, 6);
    CHECK(p.group_count() == 3);
    CHECK(p.group_weights()[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(p.group_weights()[1] == doctest::Approx(1.0));
    CHECK(p.group_weights()[2] == doctest::Approx(std::sqrt(3.0)));

    CHECK_THROWS_AS(GroupPartition::with_default_weights({{0, 1}, {1, 2}}, 3), Error);  // overlap
    CHECK_THROWS_AS(GroupPartition::with_default_weights({{0, 1}}, 3), Error);          // gap
    CHECK_THROWS_AS(GroupPartition({{0}, {1}}, Vector::Ones(1), 2), Error);             // weight count
    Vector bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(GroupPartition({{0}, {1}}, bad, 2), Error);
}

TEST_CASE("range constraint and hyperparameter validation") {
    CHECK_NOTHROW(RangeConstraint(0.0, 0.5));
    CHECK_THROWS_CODE(RangeConstraint(-1.0, 0.5), ErrorCode::NegativeGamma);

    Hyperparameters h;
    CHECK_NOTHROW(h.validate());
    h.lambda2 = -1.0;
    CHECK_THROWS_CODE(h.validate(), ErrorCode::NegativeLambda);
    h.lambda2 = 0.0;
    h.gamma = -0.5;
    CHECK_THROWS_CODE(h.validate(), ErrorCode::NegativeGamma);
    h.gamma = 0.0;
    h.max_outer_iterations = 0;
    CHECK_THROWS_AS(h.validate(), Error);
}

TEST_CASE("error codes have readable names") {
    CHECK(std::string(to_string(ErrorCode::DegenerateWeights)) == "DegenerateWeights");
    Error e(ErrorCode::ParseError, "bad row");
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("bad row") != std::string::npos);
}
