#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gfcpanel/numerics.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace gfcpanel;

TEST_CASE("normal upper tail matches table values") {
    CHECK(num::normal_sf(0.0) == doctest::Approx(0.5));
    CHECK(num::normal_sf(1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
    CHECK(num::normal_sf(-1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
}

TEST_CASE("chi-square upper tail matches table values") {
    CHECK(num::chi2_sf(0.0, 3) == doctest::Approx(1.0));
    CHECK(num::chi2_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(num::chi2_sf(7.814728, 3) == doctest::Approx(0.05).epsilon(1e-5));
    // chi2(2) tail has the closed form exp(-x/2)
    for (double x : {0.5, 1.0, 2.5, 7.0})
        CHECK(num::chi2_sf(x, 2) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
}

TEST_CASE("student t two-sided p matches table values") {
    CHECK(num::student_t_two_sided(2.776445, 4) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(num::student_t_two_sided(0.0, 10) == doctest::Approx(1.0));
    // t(1) is Cauchy: P(|T| > 1) = 0.5
    CHECK(num::student_t_two_sided(1.0, 1) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("psd pseudo-inverse") {
    Eigen::MatrixXd m(2, 2);
    m << 4.0, 0.0, 0.0, 9.0;
    auto inv = num::pinv_psd(m, 1e-10);
    CHECK_FALSE(inv.deficient);
    CHECK(inv.rank == 2);
    CHECK((inv.inverse * m - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

    Eigen::MatrixXd s(2, 2);
    s << 1.0, 1.0, 1.0, 1.0; // rank 1
    auto pinv = num::pinv_psd(s, 1e-10);
    CHECK(pinv.deficient);
    CHECK(pinv.rank == 1);
    // Moore-Penrose property on the retained subspace
    CHECK((s * pinv.inverse * s - s).norm() < 1e-12);
}

TEST_CASE("psd sqrt clips negative eigenvalues") {
    Eigen::MatrixXd v(2, 2);
    v << 2.0, 0.5, 0.5, 1.0;
    auto s = num::psd_sqrt(v);
    CHECK(s.clipped_count == 0);
    CHECK((s.root * s.root.transpose() - v).norm() < 1e-12);

    Eigen::MatrixXd neg(2, 2);
    neg << 1.0, 0.0, 0.0, -0.25;
    auto c = num::psd_sqrt(neg);
    CHECK(c.clipped_count == 1);
    CHECK(c.clipped_mass == doctest::Approx(0.25));
    Eigen::MatrixXd rebuilt = c.root * c.root.transpose();
    CHECK(rebuilt(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("quantile interpolates order statistics") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(num::quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(num::quantile(v, 1.0) == doctest::Approx(4.0));
    CHECK(num::quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(num::quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
    std::vector<double> constant{7.0, 7.0, 7.0};
    CHECK(num::quantile(constant, 0.1) == 7.0);
    CHECK(num::quantile(constant, 0.9) == 7.0);
}

TEST_CASE("substream seeds are deterministic and spread out") {
    CHECK(num::substream_seed(42, 1, 2) == num::substream_seed(42, 1, 2));
    CHECK(num::substream_seed(42, 1, 2) != num::substream_seed(42, 1, 3));
    CHECK(num::substream_seed(42, 1, 2) != num::substream_seed(43, 1, 2));
}

TEST_CASE("normal sampler has roughly unit moments") {
    num::NormalSampler rng(123);
    const int n = 20000;
    double sum = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng();
        sum += z;
        ss += z * z;
    }
    double mean = sum / n;
    double var = ss / n - mean * mean;
    CHECK(std::fabs(mean) < 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fnv1a64 known value") {
    // offset basis: hash of the empty string
    CHECK(num::fnv1a64(std::string()) == 14695981039346656037ULL);
    CHECK(num::fnv1a64(std::string("a")) != num::fnv1a64(std::string("b")));
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        std::string s = num::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("parallel_for covers every index once, any worker count") {
    const int n = 1000;
    for (int workers : {1, 3, 7}) {
        std::vector<int> hits(n, 0);
        num::parallel_for(n, workers, [&](int i) { hits[i] += 1; });
        for (int i = 0; i < n; ++i) CHECK(hits[i] == 1);
    }
}
