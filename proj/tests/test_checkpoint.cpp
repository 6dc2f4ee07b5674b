#include <doctest.h>

#include <Eigen/Dense>
#include <cstring>
#include <fstream>
#include <limits>

#include "gda/checkpoint.hpp"
#include "gda/rng.hpp"
#include "helpers.hpp"

using namespace gda;

TEST_SUITE("checkpoint") {
  TEST_CASE("tensor round trip is exact") {
    const std::string dir = testutil::fresh_dir("ckpt");
    Rng rng(1);
    Eigen::MatrixXd a = rng.normal_matrix(7, 3);
    a(0, 0) = -0.0;
    a(1, 1) = std::numeric_limits<double>::denorm_min();
    a(2, 2) = 1e308;
    Eigen::MatrixXd b = rng.normal_matrix(1, 1);
    Eigen::MatrixXd c(0, 4);  // empty tensors are legal
    const std::string path = dir + "/t.ckpt";
    save_tensors(path, {{"alpha", &a}, {"beta", &b}, {"gamma", &c}});

    const auto loaded = load_tensors(path);
    REQUIRE(loaded.size() == 3);
    REQUIRE(loaded.count("alpha") == 1);
    CHECK(loaded.at("alpha").rows() == 7);
    CHECK(loaded.at("alpha").cols() == 3);
    // bitwise: signed zero and denormals survive
    CHECK(std::memcmp(loaded.at("alpha").data(), a.data(), sizeof(double) * 21) == 0);
    CHECK(loaded.at("beta")(0, 0) == b(0, 0));
    CHECK(loaded.at("gamma").rows() == 0);
    CHECK(loaded.at("gamma").cols() == 4);
  }

  TEST_CASE("assign_tensors restores by name and validates shapes") {
    const std::string dir = testutil::fresh_dir("ckpt_assign");
    Rng rng(2);
    Eigen::MatrixXd w = rng.normal_matrix(4, 4);
    const std::string path = dir + "/m.ckpt";
    save_tensors(path, {{"w", &w}});
    const auto loaded = load_tensors(path);

    Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(4, 4);
    assign_tensors({{"w", &w2}}, loaded);
    CHECK((w2 - w).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd wrong_shape = Eigen::MatrixXd::Zero(4, 5);
    CHECK_THROWS(assign_tensors({{"w", &wrong_shape}}, loaded));
    Eigen::MatrixXd missing = Eigen::MatrixXd::Zero(4, 4);
    CHECK_THROWS(assign_tensors({{"nope", &missing}}, loaded));
  }

  TEST_CASE("file_checksum reacts to a byte flip") {
    const std::string dir = testutil::fresh_dir("ckpt_sum");
    const std::string path = dir + "/f.bin";
    {
      std::ofstream out(path, std::ios::binary);
      out << "payload-payload";
    }
    const auto before = file_checksum(path);
    {
      std::ofstream out(path, std::ios::binary);
      out << "payload-payloaD";
    }
    CHECK(file_checksum(path) != before);
  }

  TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("corrupt magic is rejected") {
    const std::string dir = testutil::fresh_dir("ckpt_magic");
    const std::string path = dir + "/bad.ckpt";
    {
      std::ofstream out(path, std::ios::binary);
      out << "NOTMAGIC" << std::string(16, '\0');
    }
    CHECK_THROWS(load_tensors(path));
  }
}
