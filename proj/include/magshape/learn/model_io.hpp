#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "magshape/learn/forest.hpp"
#include "magshape/learn/net.hpp"

namespace magshape::learn {

// Versioned JSON model files ({"kind": "forest"|"net", "version": 1, ...}).
// Doubles are written in shortest round-trip decimal form, so save -> load
// -> predict is bit-exact. Out-of-bag row sets are not stored; they are
// reconstructed from the per-tree seed streams at load time.

constexpr int kModelFormatVersion = 1;

void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

void save_net(const NetModel& model, const std::filesystem::path& path);
NetModel load_net(const std::filesystem::path& path);

using AnyModel = std::variant<ForestModel, NetModel>;

// dispatch on the "kind" field; throws Error(Data) on version/kind mismatch
AnyModel load_model(const std::filesystem::path& path);

std::string model_kind(const AnyModel& model);
Eigen::MatrixXd predict_any(const AnyModel& model, const Eigen::MatrixXd& features);

}  // namespace magshape::learn
