// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <initializer_list>
#include <string>

#include "funnelforge/config.hpp"
#include "funnelforge/error.hpp"

namespace testutil {

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(values.size());
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

inline std::string example_config_path() { return FUNNELFORGE_SOURCE_DIR "/config/patrol_example.json"; }

inline const funnelforge::config::Bundle& example_bundle() {
  static const funnelforge::config::Bundle b = funnelforge::config::load_config(example_config_path());
  return b;
}

}  // namespace testutil

// Asserts that `stmt` throws funnelforge::Error with the given code.
#define EXPECT_FF_ERROR(stmt, expected_code)                                 \
  do {                                                                       \
    try {                                                                    \
      stmt;                                                                  \
      ADD_FAILURE() << "expected " << funnelforge::to_string(expected_code); \
    } catch (const funnelforge::Error& e) {                                  \
      EXPECT_EQ(e.code(), expected_code) << e.what();                        \
    }                                                                        \
  } while (0)
