#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "dpss/synth.hpp"

using namespace dpss;

TEST_CASE("SpectrumSpec validation") {
    REQUIRE_NOTHROW(SpectrumSpec::gapped(6, 2, 1e-3).validate());
    SpectrumSpec bad = SpectrumSpec::gapped(6, 2, 1e-3);
    bad.eigenvalues(3) = 2.0;  // not descending
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    SpectrumSpec neg = SpectrumSpec::gapped(6, 2, 1e-3);
    neg.eigenvalues(5) = -1.0;
    REQUIRE_THROWS_AS(neg.validate(), ConfigError);
    SpectrumSpec range = SpectrumSpec::gapped(6, 2, 1e-3);
    range.k = 7;
    REQUIRE_THROWS_AS(range.validate(), ConfigError);
}

TEST_CASE("haar_orthogonal produces orthogonal matrices") {
    Rng rng = make_rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 8);
        const Matrix q = haar_orthogonal(d, rng);
        REQUIRE((q.transpose() * q - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("haar_orthogonal first column is uniform on the sphere (first-moment check)") {
    Rng rng = make_rng(18);
    const int trials = 2000;
    Vector mean = Vector::Zero(4);
    for (int trial = 0; trial < trials; ++trial) mean += haar_orthogonal(4, rng).col(0);
    mean /= trials;
    REQUIRE(mean.norm() < 0.05);  // E[col] = 0; sd of each coordinate ~ 1/(2*sqrt(trials))
}

TEST_CASE("make_covariance") {
    Rng rng = make_rng(19);
    const SpectrumSpec spec = SpectrumSpec::gapped(6, 2, 1e-2);
    const CovarianceModel model = make_covariance(spec, rng);
    REQUIRE((model.sigma - model.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.sigma);
    Vector ev = es.eigenvalues().reverse();
    for (int i = 0; i < 6; ++i) REQUIRE(ev(i) == Catch::Approx(spec.eigenvalues(i)).margin(1e-10));
    REQUIRE(model.truth.rank == 2);
    // truth commutes with sigma and captures the top eigenvalues
    REQUIRE((model.sigma * model.truth.entries - model.truth.entries * model.sigma).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((model.truth.entries * model.sigma).trace() == Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("sample_gaussian empirical covariance") {
    Rng rng = make_rng(20);
    Matrix sigma(3, 3);
    sigma << 2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.25;
    const int n = 60000;
    const Matrix x = sample_gaussian(sigma, n, rng);
    REQUIRE(x.rows() == 3);
    REQUIRE(x.cols() == n);
    const Matrix emp = x * x.transpose() / static_cast<double>(n);
    REQUIRE((emp - sigma).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("sample_gaussian respects a degenerate covariance") {
    Rng rng = make_rng(21);
    Matrix sigma = Matrix::Zero(3, 3);
    sigma(0, 0) = 1.0;  // rank one: all mass on the first axis
    const Matrix x = sample_gaussian(sigma, 500, rng);
    REQUIRE(x.bottomRows(2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gen_exact_instance") {
    SECTION("membership structure") {
        Rng rng = make_rng(22);
        const ExactInstance inst = gen_exact_instance(5, 2, 30, 2, rng);
        REQUIRE(inst.adversarial_count == 2);
        int members = 0;
        for (int i = 0; i < 30; ++i) {
            if (contains(inst.truth, inst.data.col(i), 1e-9)) ++members;
        }
        REQUIRE(members == 28);  // adversarial columns miss the span a.s.
        REQUIRE(inst.truth.rank() == 2);
    }
    SECTION("reproducible from the seed") {
        Rng r1 = make_rng(23), r2 = make_rng(23);
        const ExactInstance a = gen_exact_instance(4, 2, 20, 1, r1);
        const ExactInstance b = gen_exact_instance(4, 2, 20, 1, r2);
        REQUIRE((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("argument validation") {
        Rng rng = make_rng(24);
        REQUIRE_THROWS_AS(gen_exact_instance(3, 2, 1, 1, rng), ConfigError);   // n < k
        REQUIRE_THROWS_AS(gen_exact_instance(3, 2, 10, 0, rng), ConfigError);  // ell < k-1
        REQUIRE_THROWS_AS(gen_exact_instance(2, 2, 10, 1, rng), ConfigError);  // d <= k
    }
    SECTION("brute-force verifier rejects a rigged instance") {
        // 5 collinear points exceed ell = 1 for k = 2
        Matrix data(3, 6);
        data.setZero();
        for (int j = 0; j < 5; ++j) data(0, j) = static_cast<double>(j + 1);
        data(1, 5) = 1.0;
        Matrix span(3, 2);
        span << 1, 0, 0, 1, 0, 0;
        const ExactInstance rigged{data, orthonormalize(span, 1e-12), 0};
        REQUIRE_FALSE(detail::verify_exact_instance(rigged, 2, 1, 1e-9));
    }
}

TEST_CASE("non-private PCA of a gapped instance recovers the truth subspace") {
    Rng rng = make_rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        const CovarianceModel model = make_covariance(SpectrumSpec::gapped(8, 2, 1e-3), rng);
        const Matrix x = sample_gaussian(model.sigma, 10000, rng);
        const ProjectionMatrix emp = projector_of(top_k_subspace(x, 2));
        REQUIRE(projector_distance(emp, model.truth) <= 0.05);
    }
}

TEST_CASE("sampler_self_test") {
    SECTION("frozen thresholds and pass at desk scale") {
        Rng rng = make_rng(25);
        const SelfTestReport rep = sampler_self_test(2, 3.0, 20000, rng);
        REQUIRE(rep.chi2_threshold == Catch::Approx(12.89898).epsilon(1e-5));
        REQUIRE(rep.chi2_tail_bound >= std::exp(-3.0));
        REQUIRE(rep.chi2_empirical <= rep.chi2_tail_bound);
        REQUIRE(rep.band_pass_fraction >= 0.99);
        REQUIRE(rep.pass);
    }
    SECTION("reproducible under the same seed") {
        Rng r1 = make_rng(26), r2 = make_rng(26);
        const SelfTestReport a = sampler_self_test(1, 2.0, 10000, r1);
        const SelfTestReport b = sampler_self_test(1, 2.0, 10000, r2);
        REQUIRE(a.chi2_empirical == b.chi2_empirical);
        REQUIRE(a.band_worst_c == b.band_worst_c);
    }
    SECTION("trial floor") {
        Rng rng = make_rng(27);
        REQUIRE_THROWS_AS(sampler_self_test(2, 3.0, 9999, rng), ConfigError);
    }
}

TEST_CASE("matrix CSV round trip") {
    Rng rng = make_rng(28);
    Matrix m(3, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = standard_normal(rng);
    const std::string path = "roundtrip_test.csv";
    save_matrix_csv(path, m, 2, 0xDEADBEEFULL);
    const LoadedMatrix loaded = load_matrix_csv(path);
    REQUIRE(loaded.d == 3);
    REQUIRE(loaded.n == 5);
    REQUIRE(loaded.k == 2);
    REQUIRE(loaded.seed == 0xDEADBEEFULL);
    REQUIRE((loaded.data - m).cwiseAbs().maxCoeff() == 0.0);  // 17 digits round-trips doubles
    std::remove(path.c_str());

    REQUIRE_THROWS_AS(load_matrix_csv("no_such_file.csv"), Error);
}
