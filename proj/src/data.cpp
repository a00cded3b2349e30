#include "tfmvc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tfmvc::data {

namespace fs = std::filesystem;

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(views.size());
  for (const auto& v : views) dims.push_back(v.cols);
  return dims;
}

namespace {

[[noreturn]] void load_error(const fs::path& dir, const std::string& msg) {
  throw std::runtime_error("load_dataset " + dir.string() + ": " + msg);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void validate(const MultiViewDataset& ds, const fs::path& dir) {
  const std::size_t n = ds.labels.size();
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    if (ds.views[v].rows != n) {
      load_error(dir, "view " + std::to_string(v) + " has " + std::to_string(ds.views[v].rows) +
                          " rows, labels have " + std::to_string(n));
    }
    for (double x : ds.views[v].values) {
      if (!std::isfinite(x)) load_error(dir, "non-finite value in view " + std::to_string(v));
    }
  }
  for (int y : ds.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= ds.num_classes) {
      load_error(dir, "label " + std::to_string(y) + " outside [0, " +
                          std::to_string(ds.num_classes) + ")");
    }
  }
}

}  // namespace

MultiViewDataset load_dataset(const fs::path& dir) {
  std::ifstream meta(dir / "meta");
  if (!meta) load_error(dir, "missing meta file");

  MultiViewDataset ds;
  std::size_t n = 0, v_count = 0;
  std::vector<std::size_t> dims;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    if (!(ls >> key)) continue;
    if (key == "#") continue;
    if (!(ls >> eq) || eq != "=") load_error(dir, "malformed meta line: " + line);
    if (key == "K") {
      ls >> ds.num_classes;
    } else if (key == "V") {
      ls >> v_count;
    } else if (key == "N") {
      ls >> n;
    } else if (key == "dims") {
      std::string rest;
      std::getline(ls, rest);
      std::istringstream ds_in(rest);
      std::string tok;
      while (std::getline(ds_in, tok, ',')) {
        if (tok.empty()) continue;
        try {
          dims.push_back(std::stoul(tok));
        } catch (const std::exception&) {
          load_error(dir, "malformed dims entry '" + tok + "'");
        }
      }
    } else if (key == "name") {
      ls >> ds.name;
    }
  }
  if (ds.num_classes == 0 || v_count == 0 || n == 0) {
    load_error(dir, "meta must declare positive K, V and N");
  }
  if (dims.size() != v_count) load_error(dir, "dims count does not match V");

  for (std::size_t v = 0; v < v_count; ++v) {
    const fs::path p = dir / ("view" + std::to_string(v) + ".csv");
    std::ifstream in(p);
    if (!in) load_error(dir, "missing " + p.filename().string());
    Matrix m(n, dims[v]);
    for (std::size_t r = 0; r < n; ++r) {
      if (!std::getline(in, line)) {
        load_error(dir, p.filename().string() + " has fewer than N rows");
      }
      std::istringstream row(line);
      std::string tok;
      std::size_t c = 0;
      while (std::getline(row, tok, ',')) {
        if (c >= dims[v]) load_error(dir, p.filename().string() + ": too many columns");
        try {
          m.at(r, c++) = std::stod(tok);
        } catch (const std::exception&) {
          load_error(dir, p.filename().string() + ": malformed value '" + tok + "' in row " +
                              std::to_string(r));
        }
      }
      if (c != dims[v]) {
        load_error(dir, p.filename().string() + ": row " + std::to_string(r) + " has " +
                            std::to_string(c) + " columns, expected " + std::to_string(dims[v]));
      }
    }
    if (std::getline(in, line) && !line.empty()) {
      load_error(dir, p.filename().string() + " has more than N rows");
    }
    ds.views.push_back(std::move(m));
  }

  std::ifstream lab(dir / "labels");
  if (!lab) load_error(dir, "missing labels file");
  int y = 0;
  while (lab >> y) ds.labels.push_back(y);
  if (ds.labels.size() != n) {
    load_error(dir, "labels has " + std::to_string(ds.labels.size()) + " entries, expected " +
                        std::to_string(n));
  }
  validate(ds, dir);
  return ds;
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream meta(dir / "meta");
    if (!meta) throw std::runtime_error("cannot write meta in " + dir.string());
    meta << "K = " << ds.num_classes << "\n";
    meta << "V = " << ds.num_views() << "\n";
    meta << "N = " << ds.num_instances() << "\n";
    meta << "dims = ";
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
      meta << ds.views[v].cols << (v + 1 == ds.views.size() ? "" : ",");
    }
    meta << "\n";
    if (!ds.name.empty()) meta << "name = " << ds.name << "\n";
  }
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    std::ofstream out(dir / ("view" + std::to_string(v) + ".csv"));
    const Matrix& m = ds.views[v];
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        out << format_double(m.at(r, c)) << (c + 1 == m.cols ? "" : ",");
      }
      out << "\n";
    }
  }
  std::ofstream lab(dir / "labels");
  for (int y : ds.labels) lab << y << "\n";
}

MultiViewDataset split(const MultiViewDataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train fraction must lie strictly in (0,1)");
  }
  const std::size_t n = ds.num_instances();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  if (n_train == 0 || n_train == n) throw std::invalid_argument("split: degenerate fraction");
  MultiViewDataset out = ds;
  out.train_idx.assign(order.begin(), order.begin() + n_train);
  out.test_idx.assign(order.begin() + n_train, order.end());
  return out;
}

MultiViewDataset make_pseudo_view(const MultiViewDataset& ds) {
  MultiViewDataset out = ds;
  std::size_t total = 0;
  for (const auto& v : ds.views) total += v.cols;
  Matrix pseudo(ds.num_instances(), total);
  for (std::size_t r = 0; r < pseudo.rows; ++r) {
    std::size_t offset = 0;
    for (const auto& v : ds.views) {
      std::copy(v.row(r), v.row(r) + v.cols, pseudo.values.begin() + r * total + offset);
      offset += v.cols;
    }
  }
  out.views.push_back(std::move(pseudo));
  return out;
}

SynthSpec conflict_fixture_spec() {
  // Two narrow views with seeded random class means (heterogeneous,
  // complementary confusability) plus one tight, confident view whose
  // rows land in the next class's cluster 30% of the time.
  SynthSpec spec;
  spec.num_classes = 5;
  spec.num_views = 3;
  spec.num_instances = 2000;
  spec.view_dims = {4, 4, 8};
  spec.separation = {3.0, 3.0, 5.0};
  spec.noise_scale = {1.0, 1.0, 0.3};
  spec.misleading_views = {2};
  spec.mislead_fraction = 0.3;
  return spec;
}

MultiViewDataset synth_conflict(const SynthSpec& spec) {
  if (spec.num_classes < 2 || spec.num_views == 0 || spec.num_instances == 0) {
    throw std::invalid_argument("synth_conflict: need K >= 2, V >= 1, N >= 1");
  }
  if (spec.view_dims.size() != spec.num_views) {
    throw std::invalid_argument("synth_conflict: view_dims size must equal V");
  }
  std::vector<double> sep = spec.separation.empty()
                                ? std::vector<double>(spec.num_views, 3.0)
                                : spec.separation;
  std::vector<double> noise = spec.noise_scale.empty()
                                  ? std::vector<double>(spec.num_views, 1.0)
                                  : spec.noise_scale;
  if (sep.size() != spec.num_views || noise.size() != spec.num_views) {
    throw std::invalid_argument("synth_conflict: separation/noise size must equal V");
  }
  for (double s : sep) {
    if (!(s > 0.0)) throw std::invalid_argument("synth_conflict: separation must be positive");
  }
  std::vector<int> perm = spec.permutation;
  if (perm.empty()) {
    perm.resize(spec.num_classes);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      perm[k] = static_cast<int>((k + 1) % spec.num_classes);
    }
  }
  if (perm.size() != spec.num_classes) {
    throw std::invalid_argument("synth_conflict: permutation size must equal K");
  }
  {
    std::vector<bool> seen(spec.num_classes, false);
    for (int p : perm) {
      if (p < 0 || static_cast<std::size_t>(p) >= spec.num_classes || seen[p]) {
        throw std::invalid_argument("synth_conflict: permutation is not a bijection");
      }
      seen[p] = true;
    }
  }
  for (std::size_t v : spec.misleading_views) {
    if (v >= spec.num_views) throw std::invalid_argument("synth_conflict: misleading view index");
  }

  if (!(spec.mislead_fraction >= 0.0 && spec.mislead_fraction <= 1.0)) {
    throw std::invalid_argument("synth_conflict: mislead_fraction must lie in [0,1]");
  }
  std::mt19937_64 rng(mix_seed(spec.seed, "synth"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> label_dist(0, static_cast<int>(spec.num_classes) - 1);
  std::bernoulli_distribution coin(spec.mislead_fraction);

  // Class means: scaled one-hot directions when the view is wide enough,
  // otherwise seeded unit-ish random directions.
  std::vector<std::vector<std::vector<double>>> means(spec.num_views);
  for (std::size_t v = 0; v < spec.num_views; ++v) {
    means[v].resize(spec.num_classes);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      std::vector<double> mu(spec.view_dims[v], 0.0);
      if (spec.view_dims[v] >= spec.num_classes) {
        mu[k] = sep[v];
      } else {
        for (double& x : mu) x = gauss(rng) * sep[v] / std::sqrt(double(spec.view_dims[v]));
      }
      means[v][k] = std::move(mu);
    }
  }

  MultiViewDataset ds;
  ds.name = "synth";
  ds.num_classes = spec.num_classes;
  ds.labels.resize(spec.num_instances);
  for (auto& y : ds.labels) y = label_dist(rng);
  for (std::size_t v = 0; v < spec.num_views; ++v) {
    const bool misleading = std::find(spec.misleading_views.begin(), spec.misleading_views.end(),
                                      v) != spec.misleading_views.end();
    Matrix m(spec.num_instances, spec.view_dims[v]);
    for (std::size_t i = 0; i < spec.num_instances; ++i) {
      int k = ds.labels[i];
      if (misleading && perm[k] != k && coin(rng)) k = perm[k];
      const std::vector<double>& mu = means[v][k];
      for (std::size_t c = 0; c < spec.view_dims[v]; ++c) {
        m.at(i, c) = mu[c] + noise[v] * gauss(rng);
      }
    }
    ds.views.push_back(std::move(m));
  }
  return ds;
}

MultiViewDataset inject_noise(const MultiViewDataset& ds, double level, double fraction,
                              std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("inject_noise: level must be nonnegative");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("inject_noise: fraction must lie in [0,1]");
  }
  if (level == 0.0 || fraction == 0.0) return ds;
  if (!ds.has_split()) throw std::invalid_argument("inject_noise: dataset has no split");

  // Per-feature standard deviation over the training split.
  std::vector<std::vector<double>> train_sd(ds.num_views());
  for (std::size_t v = 0; v < ds.num_views(); ++v) {
    const Matrix& m = ds.views[v];
    std::vector<double> mean(m.cols, 0.0), sq(m.cols, 0.0);
    for (std::size_t r : ds.train_idx) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        mean[c] += m.at(r, c);
        sq[c] += m.at(r, c) * m.at(r, c);
      }
    }
    const double n = static_cast<double>(ds.train_idx.size());
    train_sd[v].resize(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double var = std::max(0.0, sq[c] / n - (mean[c] / n) * (mean[c] / n));
      train_sd[v][c] = std::sqrt(var);
    }
  }

  MultiViewDataset out = ds;
  std::mt19937_64 rng(mix_seed(seed, "noise"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_view(0, ds.num_views() - 1);
  for (std::size_t r : ds.test_idx) {
    if (unif(rng) >= fraction) continue;
    const std::size_t v = pick_view(rng);
    Matrix& m = out.views[v];
    for (std::size_t c = 0; c < m.cols; ++c) {
      m.at(r, c) += level * train_sd[v][c] * gauss(rng);
    }
  }
  return out;
}

MultiViewDataset normalize(const MultiViewDataset& ds) {
  if (!ds.has_split()) throw std::invalid_argument("normalize: dataset has no split");
  MultiViewDataset out = ds;
  for (std::size_t v = 0; v < ds.num_views(); ++v) {
    const Matrix& m = ds.views[v];
    std::vector<double> mean(m.cols, 0.0), sq(m.cols, 0.0);
    for (std::size_t r : ds.train_idx) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        mean[c] += m.at(r, c);
        sq[c] += m.at(r, c) * m.at(r, c);
      }
    }
    const double n = static_cast<double>(ds.train_idx.size());
    std::vector<double> sd(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
      mean[c] /= n;
      sd[c] = std::sqrt(std::max(0.0, sq[c] / n - mean[c] * mean[c]));
    }
    Matrix& o = out.views[v];
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        o.at(r, c) = sd[c] > 0.0 ? (m.at(r, c) - mean[c]) / sd[c] : 0.0;
      }
    }
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV offset basis
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (char c : stream) mix(static_cast<unsigned char>(c));
  return h;
}

std::string dataset_fingerprint(const fs::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const std::string& bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  std::vector<std::string> names = {"meta", "labels"};
  for (std::size_t v = 0;; ++v) {
    const fs::path p = dir / ("view" + std::to_string(v) + ".csv");
    if (!fs::exists(p)) break;
    names.push_back(p.filename().string());
  }
  for (const std::string& name : names) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw std::runtime_error("fingerprint: cannot read " + (dir / name).string());
    std::ostringstream buf;
    buf << in.rdbuf();
    mix_bytes(name);
    mix_bytes(buf.str());
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace tfmvc::data
