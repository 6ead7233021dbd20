#include "spoofbench/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "spoofbench/csv.hpp"
#include "spoofbench/dataset.hpp"

namespace spoofbench::materials {

void Curve::validate(const std::string& what) const {
  if (x.size() != y.size()) throw DataError(what + ": abscissa and value counts differ");
  if (x.size() < 8) throw DataError(what + ": need at least 8 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError(what + ": non-finite sample");
    if (i > 0 && !(x[i] > x[i - 1])) throw DataError(what + ": abscissae must be strictly increasing");
  }
}

double Curve::at(double t) const {
  if (t < x.front() || t > x.back()) throw InvalidArgument("curve evaluated outside its domain");
  auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
  if (hi == x.size()) return y.back();
  const std::size_t lo = hi - 1;
  const double f = (t - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + f * (y[hi] - y[lo]);
}

void CorrelationMatrix::validate() const {
  const std::size_t n = size();
  if (values.size() != n * n) throw DataError("correlation matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 1.0) throw DataError("correlation matrix diagonal must be 1 (" + labels[i] + ")");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(at(i, j))) throw DataError("correlation matrix has non-finite entries");
      if (at(i, j) != at(j, i)) throw DataError("correlation matrix is not symmetric");
    }
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("pearson: need two equal-length series of >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

const Curve& curve_of(const MaterialProfile& p, Spectrum which) { return which == Spectrum::UvVis ? p.uvvis : p.ftir; }

CorrelationMatrix empty_matrix(std::span<const MaterialProfile> profiles) {
  CorrelationMatrix m;
  for (const auto& p : profiles) m.labels.push_back(p.name);
  m.values.assign(m.labels.size() * m.labels.size(), 0.0);
  return m;
}

}  // namespace

std::vector<std::vector<double>> common_grid(std::span<const MaterialProfile> profiles, Spectrum which) {
  if (profiles.size() < 2) throw InvalidArgument("need at least 2 material profiles");
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (const auto& p : profiles) {
    const auto& c = curve_of(p, which);
    c.validate(p.name);
    lo = std::max(lo, c.x.front());
    hi = std::min(hi, c.x.back());
  }
  if (!(lo < hi)) throw DataError("spectra have no common domain");
  std::vector<std::vector<double>> out;
  for (const auto& p : profiles) {
    const auto& c = curve_of(p, which);
    std::vector<double> v(kGridPoints);
    for (int k = 0; k < kGridPoints; ++k) {
      const double t = k == kGridPoints - 1 ? hi : lo + (hi - lo) * k / (kGridPoints - 1);
      v[static_cast<std::size_t>(k)] = c.at(t);
    }
    out.push_back(std::move(v));
  }
  return out;
}

CorrelationMatrix continuous_corr(std::span<const MaterialProfile> profiles, Spectrum which) {
  const auto grid = common_grid(profiles, which);
  auto m = empty_matrix(profiles);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      try {
        m.at(i, j) = m.at(j, i) = pearson(grid[i], grid[j]);
      } catch (const UndefinedCorrelation&) {
        throw UndefinedCorrelation("flat spectrum in pair " + m.labels[i] + " / " + m.labels[j]);
      }
    }
  }
  return m;
}

CorrelationMatrix categorical_corr(std::span<const MaterialProfile> profiles, Category which) {
  auto m = empty_matrix(profiles);
  const auto cls = [&](std::size_t i) {
    return which == Category::Elasticity ? profiles[i].elasticity : profiles[i].moisture;
  };
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) m.at(i, j) = cls(i) == cls(j) ? 1.0 : 0.0;
  }
  return m;
}

CorrelationMatrix material_corr(const CorrelationMatrix& uvvis, const CorrelationMatrix& ftir,
                                const CorrelationMatrix& elastic, const CorrelationMatrix& moisture) {
  for (const auto* m : {&ftir, &elastic, &moisture}) {
    if (m->labels != uvvis.labels || m->values.size() != uvvis.values.size()) {
      throw InvalidArgument("material_corr: matrices have different labels");
    }
  }
  CorrelationMatrix out = uvvis;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (uvvis.values[i] + ftir.values[i] + elastic.values[i] + moisture.values[i]) / 4.0;
  }
  return out;
}

Dendrogram complete_link(const CorrelationMatrix& corr) {
  const std::size_t n = corr.size();
  if (n < 2) throw InvalidArgument("complete_link: need at least 2 items");
  if (corr.values.size() != n * n) throw InvalidArgument("complete_link: matrix is not square");

  // Active clusters: node id, name key, size; distances updated by the
  // Lance-Williams rule for maximum linkage.
  struct Cluster {
    int node;
    std::string key;
    int size;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({static_cast<int>(i), corr.labels[i], 1});
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i][j] = 1.0 - corr.at(i, j);
  }

  Dendrogram out;
  out.labels = corr.labels;
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        auto key = std::minmax(active[i].key, active[j].key);
        std::pair<std::string, std::string> k{key.first, key.second};
        if (d[i][j] < best || (d[i][j] == best && k < best_key)) {
          best = d[i][j];
          best_key = std::move(k);
          bi = i;
          bj = j;
        }
      }
    }
    if (active[bj].key < active[bi].key) std::swap(bi, bj);
    Merge m{active[bi].node, active[bj].node, best, active[bi].size + active[bj].size};
    out.merges.push_back(m);

    Cluster merged{static_cast<int>(n + out.merges.size() - 1), std::min(active[bi].key, active[bj].key), m.size};
    const std::size_t keep = std::min(bi, bj), drop = std::max(bi, bj);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double v = std::max(d[bi][k], d[bj][k]);
      d[keep][k] = d[k][keep] = v;
    }
    d[keep][keep] = 0.0;
    active[keep] = std::move(merged);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
    d.erase(d.begin() + static_cast<std::ptrdiff_t>(drop));
    for (auto& row : d) row.erase(row.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return out;
}

std::vector<std::vector<int>> cut(const Dendrogram& dendrogram, int n_clusters) {
  const auto n = static_cast<int>(dendrogram.labels.size());
  if (n_clusters < 1 || n_clusters > n) throw InvalidArgument("cluster count must be in [1, " + std::to_string(n) + "]");
  std::vector<std::vector<int>> members(static_cast<std::size_t>(2 * n - 1));
  std::vector<bool> alive(members.size(), false);
  for (int i = 0; i < n; ++i) {
    members[static_cast<std::size_t>(i)] = {i};
    alive[static_cast<std::size_t>(i)] = true;
  }
  for (int m = 0; m < n - n_clusters; ++m) {
    const auto& merge = dendrogram.merges[static_cast<std::size_t>(m)];
    auto& target = members[static_cast<std::size_t>(n + m)];
    for (int child : {merge.left, merge.right}) {
      const auto c = static_cast<std::size_t>(child);
      target.insert(target.end(), members[c].begin(), members[c].end());
      alive[c] = false;
    }
    std::sort(target.begin(), target.end());
    alive[static_cast<std::size_t>(n + m)] = true;
  }
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (alive[i]) out.push_back(members[i]);
  }
  return out;
}

std::vector<std::string> representative_set(const Dendrogram& dendrogram, const CorrelationMatrix& corr, int n_reps) {
  if (corr.labels != dendrogram.labels) throw InvalidArgument("representative_set: labels differ");
  std::vector<std::string> reps;
  for (const auto& members : cut(dendrogram, n_reps)) {
    const std::string* best_name = nullptr;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (int i : members) {
      double sum = 0.0;
      for (int j : members) {
        if (i != j) sum += corr.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
      const auto& name = corr.labels[static_cast<std::size_t>(i)];
      if (sum > best_sum || (sum == best_sum && name < *best_name)) {
        best_sum = sum;
        best_name = &name;
      }
    }
    reps.push_back(*best_name);
  }
  std::sort(reps.begin(), reps.end());
  return reps;
}

std::string to_newick(const Dendrogram& dendrogram) {
  const auto n = static_cast<int>(dendrogram.labels.size());
  const auto height = [&](int node) {
    return node < n ? 0.0 : dendrogram.merges[static_cast<std::size_t>(node - n)].height;
  };
  const auto quoted = [](const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("''") : std::string(1, c);
    return q + "'";
  };
  std::function<std::string(int)> emit = [&](int node) -> std::string {
    if (node < n) return quoted(dendrogram.labels[static_cast<std::size_t>(node)]);
    const auto& m = dendrogram.merges[static_cast<std::size_t>(node - n)];
    return "(" + emit(m.left) + ":" + csv::general(m.height - height(m.left), 9) + "," + emit(m.right) + ":" +
           csv::general(m.height - height(m.right), 9) + ")";
  };
  if (n == 1) return emit(0) + ";";
  return emit(2 * n - 2) + ";";
}

std::string to_json(const Dendrogram& dendrogram) {
  nlohmann::ordered_json j;
  j["labels"] = dendrogram.labels;
  j["distance"] = "1 - correlation";
  j["linkage"] = "complete";
  auto merges = nlohmann::ordered_json::array();
  for (const auto& m : dendrogram.merges) {
    nlohmann::ordered_json row;
    row["left"] = m.left;
    row["right"] = m.right;
    row["height"] = m.height;
    row["size"] = m.size;
    merges.push_back(std::move(row));
  }
  j["merges"] = std::move(merges);
  j["newick"] = to_newick(dendrogram);
  return j.dump(2) + "\n";
}

std::string matrix_csv(const CorrelationMatrix& matrix) {
  std::string out = "material";
  for (const auto& l : matrix.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out += matrix.labels[i];
    for (std::size_t j = 0; j < matrix.size(); ++j) out += "," + csv::general(matrix.at(i, j), 17);
    out += "\n";
  }
  return out;
}

CorrelationMatrix read_matrix_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path.string());
  CorrelationMatrix m;
  m.labels.assign(table.header.begin() + 1, table.header.end());
  if (table.rows.size() != m.labels.size()) throw DataError(path.string() + ": matrix is not square");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != m.labels.size() + 1 || row[0] != m.labels[i]) {
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + " does not match the header");
    }
    for (std::size_t j = 1; j < row.size(); ++j) m.values.push_back(csv::to_double(row[j], "matrix entry"));
  }
  m.validate();
  return m;
}

Curve read_curve(const std::filesystem::path& path) {
  const auto table = csv::read_file(path.string());
  const auto cx = table.column("abscissa");
  const auto cy = table.column("value");
  Curve c;
  for (const auto& row : table.rows) {
    c.x.push_back(csv::to_double(row.at(cx), "abscissa"));
    c.y.push_back(csv::to_double(row.at(cy), "value"));
  }
  c.validate(path.string());
  return c;
}

std::vector<MaterialProfile> load_profiles(const std::filesystem::path& spectra_dir,
                                           const std::filesystem::path& classes_csv) {
  const auto table = csv::read_file(classes_csv.string());
  const auto c_name = table.column("name");
  const auto c_el = table.column("elasticity");
  const auto c_mo = table.column("moisture");
  std::vector<MaterialProfile> out;
  for (const auto& row : table.rows) {
    MaterialProfile p;
    p.name = row.at(c_name);
    for (const auto& q : out) {
      if (q.name == p.name) throw DataError("duplicate material '" + p.name + "' in " + classes_csv.string());
    }
    try {
      p.elasticity = parse_level(row.at(c_el));
      p.moisture = parse_level(row.at(c_mo));
    } catch (const InvalidArgument& e) {
      throw DataError(classes_csv.string() + ": " + e.what());
    }
    const auto file = dataset::slug(p.name) + ".csv";
    p.uvvis = read_curve(spectra_dir / "uvvis" / file);
    p.ftir = read_curve(spectra_dir / "ftir" / file);
    out.push_back(std::move(p));
  }
  if (out.size() < 2) throw DataError(classes_csv.string() + ": need at least 2 materials");
  return out;
}

}  // namespace spoofbench::materials
