/*
 * Copyright 2026 The fedaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDAUG_DATA_HPP_
#define FEDAUG_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fedaug/linalg.hpp"
#include "fedaug/model.hpp"
#include "fedaug/rng.hpp"
#include "json.hpp"

namespace fedaug {

// One labelled square image with pixels in [0, 1]. `source_index` is the
// position of the underlying semantic glyph in the bank it came from, so the
// content can be traced through rotation and splitting.
struct Glyph {
  RealMatrix pixels;
  int label = 0;
  std::size_t source_index = 0;
};

enum class EnvRole { kTrainClient, kOodTest };

// A client's private data generated at one fixed environmental angle.
struct Environment {
  std::size_t env_id = 0;
  double epsilon_deg = 0.0;
  std::vector<Glyph> samples;
  EnvRole role = EnvRole::kTrainClient;
};

// Number of procedural prototypes available to make_glyph_bank.
inline constexpr std::size_t kPrototypeCount = 14;

// The first `num_classes` prototypes of the catalog rendered at `side` x
// `side`: seven-segment digits 0-9, then ring, X-cross, T-bar and triangle.
std::vector<RealMatrix> glyph_prototypes(std::size_t num_classes,
                                         std::size_t side);

// Anti-aliased ring centred in a side x side frame; radius and stroke width
// are in units of the half-frame. The edge ramp is edge_px pixels wide.
RealMatrix draw_ring(std::size_t side, double radius, double half_width,
                     double edge_px = 1.0);

// samples_per_class noisy copies (prototype + clipped N(0, noise_std^2)) of
// each prototype, class-major order.
std::vector<Glyph> make_glyph_bank(std::size_t num_classes, std::size_t side,
                                   std::size_t samples_per_class,
                                   double noise_std, RngStream rng);

std::vector<Glyph> make_glyph_bank_from_prototypes(
    const std::vector<RealMatrix>& prototypes, std::size_t samples_per_class,
    double noise_std, RngStream rng);

// {side, classes: [{label, prototype: [[...], ...]}]}
nlohmann::json prototypes_to_json(const std::vector<RealMatrix>& prototypes);
std::vector<RealMatrix> prototypes_from_json(const nlohmann::json& doc);

// Rotation about the image centre with bilinear sampling; pixels that map
// outside the frame read as 0. The angle is reduced mod 360 first and an
// angle of 0 returns the input unchanged.
RealMatrix rotate_image(const RealMatrix& pixels, double angle_deg);

// Separable normalized Gaussian, reflect-101 borders.
RealMatrix gaussian_blur(const RealMatrix& pixels, double sigma,
                         std::size_t kernel);

// Splits the bank disjointly (class-balanced) over one environment per
// training angle plus a final OOD environment, then rotates every sample by
// its environment's angle. Throws ValueError on duplicate training angles.
std::vector<Environment> make_environments(const std::vector<Glyph>& bank,
                                           const std::vector<double>& angles_deg,
                                           double ood_angle_deg, RngStream rng);

struct AugmentationSpec {
  enum class Kind { kNone, kRandomRotation, kGaussianBlur, kCompose };

  Kind kind = Kind::kNone;
  double alpha_deg = 0.0;
  double sigma = 1.0;
  std::size_t kernel = 5;
  std::vector<AugmentationSpec> steps;

  static AugmentationSpec none() { return {}; }
  static AugmentationSpec random_rotation(double alpha_deg);
  static AugmentationSpec gaussian_blur(double sigma, std::size_t kernel);
  static AugmentationSpec compose(std::vector<AugmentationSpec> steps);

  // Throws ValueError on alpha < 0, sigma <= 0, even or < 3 kernel.
  void validate() const;
  // Short label for tables, e.g. "rotation(45)" or "blur(1,5)".
  std::string describe() const;
  bool is_identity() const;

  friend bool operator==(const AugmentationSpec&,
                         const AugmentationSpec&) = default;
};

// beta ~ U(-alpha, alpha).
double sample_rotation_angle(double alpha_deg, RngStream& rng);

// Applies the augmentation with fresh randomness from `rng`. Labels are not
// touched; this only sees pixels.
RealMatrix apply_augmentation(const AugmentationSpec& spec,
                              const RealMatrix& pixels, RngStream& rng);

struct SplitSpec {
  double dirichlet_alpha = 200.0;
  std::size_t num_clients_per_domain = 1;

  void validate() const;
};

// Per class, draws p ~ Dir(alpha 1) over clients and hands out that class's
// (shuffled) samples with largest-remainder rounding. Every sample lands in
// exactly one client. Throws ValueError if any class has fewer samples than
// clients.
std::vector<Environment> dirichlet_split(const Environment& env,
                                         const SplitSpec& split,
                                         RngStream rng);

// Random (train, validation) partition with round(fraction * n) validation
// samples, at least one in each part. Original order is kept in both.
std::pair<Environment, Environment> holdout_split(const Environment& env,
                                                  double fraction,
                                                  RngStream rng);

// Concatenation of the samples of `parts`; metadata from the first part.
Environment merge_environments(const std::vector<Environment>& parts);

// IDX image/label pair (MNIST layout). Pixels scaled to [0, 1].
std::vector<Glyph> load_idx_dataset(const std::filesystem::path& images_path,
                                    const std::filesystem::path& labels_path);

// Flattens samples row-major into a model batch.
Batch to_batch(std::span<const Glyph> samples);

}  // namespace fedaug

#endif  // FEDAUG_DATA_HPP_
