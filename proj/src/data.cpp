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

#include "fedaug/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

struct Point {
  double x;
  double y;
};

struct Segment {
  Point a;
  Point b;
};

double distance_to_segment(Point p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = s.a.x + t * dx - p.x;
  const double ey = s.a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

// Pixel centre in normalized frame coordinates [-1, 1], y pointing down.
Point pixel_center(std::size_t r, std::size_t c, std::size_t side) {
  const double s = static_cast<double>(side);
  return {(static_cast<double>(c) + 0.5) / s * 2.0 - 1.0,
          (static_cast<double>(r) + 0.5) / s * 2.0 - 1.0};
}

// Smoothstep ramp `edge_px` pixels wide centred on the stroke edge.
double coverage(double distance, double half_width, std::size_t side,
                double edge_px = 1.0) {
  const double pixel = 2.0 / static_cast<double>(side);
  const double t = std::clamp(0.5 + (half_width - distance) / (edge_px * pixel), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

RealMatrix draw_segments(const std::vector<Segment>& segments,
                         std::size_t side, double half_width) {
  RealMatrix img(side, side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const Point p = pixel_center(r, c, side);
      double d = 1e9;
      for (const Segment& s : segments) d = std::min(d, distance_to_segment(p, s));
      img(r, c) = coverage(d, half_width, side);
    }
  }
  return img;
}

// Seven-segment layout inside a 0.8 x 1.2 box centred in the frame.
constexpr double kL = -0.4, kR = 0.4, kT = -0.6, kM = 0.0, kB = 0.6;
const std::array<Segment, 7> kSevenSegments = {{
    {{kL, kT}, {kR, kT}},  // a: top
    {{kR, kT}, {kR, kM}},  // b: upper right
    {{kR, kM}, {kR, kB}},  // c: lower right
    {{kL, kB}, {kR, kB}},  // d: bottom
    {{kL, kM}, {kL, kB}},  // e: lower left
    {{kL, kT}, {kL, kM}},  // f: upper left
    {{kL, kM}, {kR, kM}},  // g: middle
}};

// Segment masks a..g for digits 0-9.
constexpr std::array<const char*, 10> kDigitSegments = {
    "abcdef", "bc", "abged", "abgcd", "fgbc",
    "afgcd", "afgedc", "abc", "abcdefg", "abcdfg"};

constexpr double kStrokeHalfWidth = 0.11;

std::vector<Segment> prototype_segments(std::size_t index) {
  std::vector<Segment> out;
  if (index < kDigitSegments.size()) {
    for (const char* s = kDigitSegments[index]; *s != '\0'; ++s) {
      out.push_back(kSevenSegments[static_cast<std::size_t>(*s - 'a')]);
    }
    return out;
  }
  switch (index) {
    case 11:  // X-cross
      return {{{-0.5, -0.5}, {0.5, 0.5}}, {{-0.5, 0.5}, {0.5, -0.5}}};
    case 12:  // T-bar
      return {{{-0.5, -0.55}, {0.5, -0.55}}, {{0.0, -0.55}, {0.0, 0.6}}};
    case 13:  // triangle
      return {{{0.0, -0.55}, {0.55, 0.5}},
              {{0.55, 0.5}, {-0.55, 0.5}},
              {{-0.55, 0.5}, {0.0, -0.55}}};
    default:
      return {};
  }
}

std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

void require_square(const RealMatrix& m, const char* op) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(op) + ": image must be square");
  }
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes,
                        std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open '" + path.string() + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<RealMatrix> glyph_prototypes(std::size_t num_classes,
                                         std::size_t side) {
  if (num_classes > kPrototypeCount) {
    throw ValueError("glyph bank: " + std::to_string(num_classes) +
                     " classes requested, catalog has " +
                     std::to_string(kPrototypeCount));
  }
  if (side < 4) throw ValueError("glyph bank: side must be >= 4");
  std::vector<RealMatrix> out;
  out.reserve(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (k == 10) {
      out.push_back(draw_ring(side, 0.55, kStrokeHalfWidth));
    } else {
      out.push_back(draw_segments(prototype_segments(k), side, kStrokeHalfWidth));
    }
  }
  return out;
}

RealMatrix draw_ring(std::size_t side, double radius, double half_width,
                     double edge_px) {
  if (!(edge_px > 0.0)) throw ValueError("draw_ring: edge_px must be > 0");
  RealMatrix img(side, side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const Point p = pixel_center(r, c, side);
      const double d = std::abs(std::hypot(p.x, p.y) - radius);
      img(r, c) = coverage(d, half_width, side, edge_px);
    }
  }
  return img;
}

std::vector<Glyph> make_glyph_bank_from_prototypes(
    const std::vector<RealMatrix>& prototypes, std::size_t samples_per_class,
    double noise_std, RngStream rng) {
  if (noise_std < 0.0) throw ValueError("glyph bank: noise_std must be >= 0");
  std::vector<Glyph> bank;
  bank.reserve(prototypes.size() * samples_per_class);
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    require_square(prototypes[k], "glyph bank");
    for (std::size_t s = 0; s < samples_per_class; ++s) {
      RealMatrix px = prototypes[k];
      if (noise_std > 0.0) {
        for (double& v : px.span()) {
          v = std::clamp(v + rng.normal(0.0, noise_std), 0.0, 1.0);
        }
      }
      bank.push_back(Glyph{std::move(px), static_cast<int>(k), bank.size()});
    }
  }
  return bank;
}

std::vector<Glyph> make_glyph_bank(std::size_t num_classes, std::size_t side,
                                   std::size_t samples_per_class,
                                   double noise_std, RngStream rng) {
  return make_glyph_bank_from_prototypes(glyph_prototypes(num_classes, side),
                                         samples_per_class, noise_std, rng);
}

nlohmann::json prototypes_to_json(const std::vector<RealMatrix>& prototypes) {
  nlohmann::json doc;
  doc["side"] = prototypes.empty() ? 0 : prototypes.front().rows();
  doc["classes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < prototypes[k].rows(); ++r) {
      auto row = prototypes[k].row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["classes"].push_back({{"label", k}, {"prototype", std::move(rows)}});
  }
  return doc;
}

std::vector<RealMatrix> prototypes_from_json(const nlohmann::json& doc) {
  const std::size_t side = doc.at("side").get<std::size_t>();
  std::map<int, RealMatrix> by_label;
  for (const auto& cls : doc.at("classes")) {
    const int label = cls.at("label").get<int>();
    const auto& rows = cls.at("prototype");
    if (rows.size() != side) {
      throw ValueError("glyph bank json: prototype " + std::to_string(label) +
                       " has wrong row count");
    }
    RealMatrix m(side, side);
    for (std::size_t r = 0; r < side; ++r) {
      const auto row = rows[r].get<std::vector<double>>();
      if (row.size() != side) {
        throw ValueError("glyph bank json: prototype " +
                         std::to_string(label) + " has wrong column count");
      }
      for (std::size_t c = 0; c < side; ++c) {
        if (row[c] < 0.0 || row[c] > 1.0) {
          throw ValueError("glyph bank json: pixel outside [0, 1]");
        }
        m(r, c) = row[c];
      }
    }
    if (!by_label.emplace(label, std::move(m)).second) {
      throw ValueError("glyph bank json: duplicate label " +
                       std::to_string(label));
    }
  }
  std::vector<RealMatrix> out;
  int expected = 0;
  for (auto& [label, m] : by_label) {
    if (label != expected++) {
      throw ValueError("glyph bank json: labels must be 0..C-1");
    }
    out.push_back(std::move(m));
  }
  return out;
}

RealMatrix rotate_image(const RealMatrix& pixels, double angle_deg) {
  require_square(pixels, "rotate_image");
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a == 0.0) return pixels;

  const std::size_t n = pixels.rows();
  const double rad = a * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double center = (static_cast<double>(n) - 1.0) / 2.0;
  const auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(n) ||
        c >= static_cast<std::ptrdiff_t>(n)) {
      return 0.0;
    }
    return pixels(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };

  RealMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      // Inverse map: where in the source does this output pixel come from.
      const double dx = static_cast<double>(c) - center;
      const double dy = static_cast<double>(r) - center;
      const double sx = cs * dx + sn * dy + center;
      const double sy = -sn * dx + cs * dy + center;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double wx = sx - fx;
      const double wy = sy - fy;
      const auto x0 = static_cast<std::ptrdiff_t>(fx);
      const auto y0 = static_cast<std::ptrdiff_t>(fy);
      const double v = (1.0 - wy) * ((1.0 - wx) * at(y0, x0) + wx * at(y0, x0 + 1)) +
                       wy * ((1.0 - wx) * at(y0 + 1, x0) + wx * at(y0 + 1, x0 + 1));
      out(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

RealMatrix gaussian_blur(const RealMatrix& pixels, double sigma,
                         std::size_t kernel) {
  require_square(pixels, "gaussian_blur");
  if (!(sigma > 0.0)) throw ValueError("gaussian_blur: sigma must be > 0");
  if (kernel < 3 || kernel % 2 == 0) {
    throw ValueError("gaussian_blur: kernel must be odd and >= 3");
  }
  const auto half = static_cast<std::ptrdiff_t>(kernel / 2);
  std::vector<double> w(kernel);
  double total = 0.0;
  for (std::ptrdiff_t j = -half; j <= half; ++j) {
    const double v = std::exp(-static_cast<double>(j * j) / (2.0 * sigma * sigma));
    w[static_cast<std::size_t>(j + half)] = v;
    total += v;
  }
  for (double& v : w) v /= total;

  const std::size_t n = pixels.rows();
  RealMatrix tmp(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -half; j <= half; ++j) {
        acc += w[static_cast<std::size_t>(j + half)] *
               pixels(r, reflect101(static_cast<std::ptrdiff_t>(c) + j, n));
      }
      tmp(r, c) = acc;
    }
  }
  RealMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -half; j <= half; ++j) {
        acc += w[static_cast<std::size_t>(j + half)] *
               tmp(reflect101(static_cast<std::ptrdiff_t>(r) + j, n), c);
      }
      out(r, c) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<Environment> make_environments(const std::vector<Glyph>& bank,
                                           const std::vector<double>& angles_deg,
                                           double ood_angle_deg, RngStream rng) {
  if (angles_deg.empty()) {
    throw ValueError("make_environments: need at least one training angle");
  }
  std::set<double> seen;
  for (double a : angles_deg) {
    if (!seen.insert(a).second) {
      throw ValueError("make_environments: duplicate angle " + std::to_string(a));
    }
  }
  const std::size_t num_envs = angles_deg.size() + 1;
  if (bank.size() < num_envs) {
    throw ValueError("make_environments: bank smaller than environment count");
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    by_class[bank[i].label].push_back(i);
  }
  std::vector<std::vector<std::size_t>> assigned(num_envs);
  std::size_t dealer = 0;
  for (auto& [label, idx] : by_class) {
    shuffle_indices(idx, rng);
    for (std::size_t i : idx) assigned[dealer++ % num_envs].push_back(i);
  }

  std::vector<Environment> envs;
  envs.reserve(num_envs);
  for (std::size_t e = 0; e < num_envs; ++e) {
    const bool ood = e + 1 == num_envs;
    Environment env;
    env.env_id = e;
    env.epsilon_deg = ood ? ood_angle_deg : angles_deg[e];
    env.role = ood ? EnvRole::kOodTest : EnvRole::kTrainClient;
    std::sort(assigned[e].begin(), assigned[e].end());
    env.samples.reserve(assigned[e].size());
    for (std::size_t i : assigned[e]) {
      env.samples.push_back(Glyph{rotate_image(bank[i].pixels, env.epsilon_deg),
                                  bank[i].label, bank[i].source_index});
    }
    envs.push_back(std::move(env));
  }
  return envs;
}

AugmentationSpec AugmentationSpec::random_rotation(double alpha_deg) {
  AugmentationSpec s;
  s.kind = Kind::kRandomRotation;
  s.alpha_deg = alpha_deg;
  return s;
}

AugmentationSpec AugmentationSpec::gaussian_blur(double sigma,
                                                 std::size_t kernel) {
  AugmentationSpec s;
  s.kind = Kind::kGaussianBlur;
  s.sigma = sigma;
  s.kernel = kernel;
  return s;
}

AugmentationSpec AugmentationSpec::compose(std::vector<AugmentationSpec> steps) {
  AugmentationSpec s;
  s.kind = Kind::kCompose;
  s.steps = std::move(steps);
  return s;
}

void AugmentationSpec::validate() const {
  switch (kind) {
    case Kind::kNone:
      return;
    case Kind::kRandomRotation:
      if (!(alpha_deg >= 0.0)) throw ValueError("augmentation: alpha_deg must be >= 0");
      return;
    case Kind::kGaussianBlur:
      if (!(sigma > 0.0)) throw ValueError("augmentation: sigma must be > 0");
      if (kernel < 3 || kernel % 2 == 0) {
        throw ValueError("augmentation: kernel must be odd and >= 3");
      }
      return;
    case Kind::kCompose:
      for (const auto& s : steps) s.validate();
      return;
  }
}

std::string AugmentationSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kNone:
      out << "none";
      break;
    case Kind::kRandomRotation:
      out << "rotation(" << alpha_deg << ")";
      break;
    case Kind::kGaussianBlur:
      out << "blur(" << sigma << "," << kernel << ")";
      break;
    case Kind::kCompose:
      for (std::size_t i = 0; i < steps.size(); ++i) {
        out << (i ? "+" : "") << steps[i].describe();
      }
      if (steps.empty()) out << "none";
      break;
  }
  return out.str();
}

bool AugmentationSpec::is_identity() const {
  switch (kind) {
    case Kind::kNone:
      return true;
    case Kind::kRandomRotation:
      return alpha_deg == 0.0;
    case Kind::kGaussianBlur:
      return false;
    case Kind::kCompose:
      return std::all_of(steps.begin(), steps.end(),
                         [](const AugmentationSpec& s) { return s.is_identity(); });
  }
  return false;
}

double sample_rotation_angle(double alpha_deg, RngStream& rng) {
  return rng.uniform(-alpha_deg, alpha_deg);
}

RealMatrix apply_augmentation(const AugmentationSpec& spec,
                              const RealMatrix& pixels, RngStream& rng) {
  switch (spec.kind) {
    case AugmentationSpec::Kind::kNone:
      return pixels;
    case AugmentationSpec::Kind::kRandomRotation:
      if (spec.alpha_deg < 0.0) throw ValueError("augmentation: alpha_deg must be >= 0");
      return rotate_image(pixels, sample_rotation_angle(spec.alpha_deg, rng));
    case AugmentationSpec::Kind::kGaussianBlur:
      return gaussian_blur(pixels, spec.sigma, spec.kernel);
    case AugmentationSpec::Kind::kCompose: {
      RealMatrix out = pixels;
      for (const auto& step : spec.steps) out = apply_augmentation(step, out, rng);
      return out;
    }
  }
  return pixels;
}

void SplitSpec::validate() const {
  if (!(dirichlet_alpha > 0.0)) throw ValueError("split: dirichlet_alpha must be > 0");
  if (num_clients_per_domain < 1) {
    throw ValueError("split: num_clients_per_domain must be >= 1");
  }
}

std::vector<Environment> dirichlet_split(const Environment& env,
                                         const SplitSpec& split,
                                         RngStream rng) {
  split.validate();
  const std::size_t k = split.num_clients_per_domain;
  if (k == 1) return {env};

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < env.samples.size(); ++i) {
    by_class[env.samples[i].label].push_back(i);
  }
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < k) {
      throw ValueError("dirichlet_split: class " + std::to_string(label) +
                       " has " + std::to_string(idx.size()) +
                       " samples for " + std::to_string(k) + " clients");
    }
  }

  std::vector<std::vector<std::size_t>> assigned(k);
  for (auto& [label, idx] : by_class) {
    shuffle_indices(idx, rng);
    std::vector<double> p(k);
    double total = 0.0;
    for (double& x : p) total += (x = rng.gamma(split.dirichlet_alpha));
    // Largest remainder: floors first, leftovers to the biggest fractions.
    const double m = static_cast<double>(idx.size());
    std::vector<std::size_t> counts(k);
    std::vector<double> frac(k);
    std::size_t used = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double share = p[c] / total * m;
      counts[c] = static_cast<std::size_t>(std::floor(share));
      frac[c] = share - static_cast<double>(counts[c]);
      used += counts[c];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; used < idx.size(); ++r, ++used) ++counts[order[r % k]];

    std::size_t pos = 0;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < counts[c]; ++j) assigned[c].push_back(idx[pos++]);
    }
  }

  // A tiny alpha can starve a client completely; move one sample over from
  // the largest client so that every client trains on something.
  for (std::size_t c = 0; c < k; ++c) {
    if (!assigned[c].empty()) continue;
    auto donor = std::max_element(
        assigned.begin(), assigned.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    assigned[c].push_back(donor->back());
    donor->pop_back();
  }

  std::vector<Environment> clients;
  clients.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    Environment client;
    client.env_id = env.env_id;
    client.epsilon_deg = env.epsilon_deg;
    client.role = env.role;
    std::sort(assigned[c].begin(), assigned[c].end());
    for (std::size_t i : assigned[c]) client.samples.push_back(env.samples[i]);
    clients.push_back(std::move(client));
  }
  return clients;
}

std::pair<Environment, Environment> holdout_split(const Environment& env,
                                                  double fraction,
                                                  RngStream rng) {
  const std::size_t n = env.samples.size();
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValueError("holdout_split: fraction must be in (0, 1)");
  }
  if (n < 2) throw ValueError("holdout_split: need at least two samples");
  std::size_t n_val =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  shuffle_indices(idx, rng);
  std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());

  Environment train_env{env.env_id, env.epsilon_deg, {}, env.role};
  Environment val_env{env.env_id, env.epsilon_deg, {}, env.role};
  for (std::size_t i : train) train_env.samples.push_back(env.samples[i]);
  for (std::size_t i : val) val_env.samples.push_back(env.samples[i]);
  return {std::move(train_env), std::move(val_env)};
}

Environment merge_environments(const std::vector<Environment>& parts) {
  if (parts.empty()) throw ValueError("merge_environments: nothing to merge");
  Environment out{parts.front().env_id, parts.front().epsilon_deg, {},
                  parts.front().role};
  for (const auto& p : parts) {
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

std::vector<Glyph> load_idx_dataset(const std::filesystem::path& images_path,
                                    const std::filesystem::path& labels_path) {
  const std::vector<unsigned char> img = read_file(images_path);
  const std::vector<unsigned char> lab = read_file(labels_path);

  if (img.size() < 4) {
    throw FormatError(FormatError::Kind::kTruncated, "images: truncated header");
  }
  if (read_be32(img, 0) != 0x00000803u) {
    throw FormatError(FormatError::Kind::kBadMagic,
                      "images: bad magic (expected 0x00000803)");
  }
  if (img.size() < 16) {
    throw FormatError(FormatError::Kind::kTruncated, "images: truncated header");
  }
  if (lab.size() < 4) {
    throw FormatError(FormatError::Kind::kTruncated, "labels: truncated header");
  }
  if (read_be32(lab, 0) != 0x00000801u) {
    throw FormatError(FormatError::Kind::kBadMagic,
                      "labels: bad magic (expected 0x00000801)");
  }
  if (lab.size() < 8) {
    throw FormatError(FormatError::Kind::kTruncated, "labels: truncated header");
  }

  const std::size_t count = read_be32(img, 4);
  const std::size_t rows = read_be32(img, 8);
  const std::size_t cols = read_be32(img, 12);
  const std::size_t label_count = read_be32(lab, 4);
  if (count != label_count) {
    throw FormatError(FormatError::Kind::kCountMismatch,
                      "idx: " + std::to_string(count) + " images but " +
                          std::to_string(label_count) + " labels");
  }
  if (img.size() < 16 + count * rows * cols) {
    throw FormatError(FormatError::Kind::kTruncated, "images: truncated file");
  }
  if (lab.size() < 8 + count) {
    throw FormatError(FormatError::Kind::kTruncated, "labels: truncated file");
  }
  if (rows != cols || rows == 0) {
    throw ValueError("idx: images must be square and non-empty");
  }

  std::vector<Glyph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RealMatrix px(rows, cols);
    const std::size_t base = 16 + i * rows * cols;
    for (std::size_t k = 0; k < rows * cols; ++k) {
      px.span()[k] = static_cast<double>(img[base + k]) / 255.0;
    }
    out.push_back(Glyph{std::move(px), static_cast<int>(lab[8 + i]), i});
  }
  return out;
}

Batch to_batch(std::span<const Glyph> samples) {
  if (samples.empty()) throw DimensionError("to_batch: no samples");
  const std::size_t dim = samples.front().pixels.rows() * samples.front().pixels.cols();
  RealMatrix inputs(samples.size(), dim);
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) {
    auto src = samples[r].pixels.span();
    if (src.size() != dim) throw DimensionError("to_batch: mixed image sizes");
    std::copy(src.begin(), src.end(), inputs.row(r).begin());
    labels.push_back(samples[r].label);
  }
  return {std::move(inputs), std::move(labels)};
}

}  // namespace fedaug
