#include "ddms/diagram.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ddms/order.hpp"

namespace ddms {

namespace {

auto pair_sort_key(const PersistencePair& p) {
  return std::tie(p.dim, p.birth_order, p.death_order, p.birth, p.death);
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Diagram::canonicalize() {
  std::erase_if(pairs, [](const PersistencePair& p) { return p.birth_order == p.death_order; });
  std::sort(pairs.begin(), pairs.end(),
            [](const PersistencePair& a, const PersistencePair& b) { return pair_sort_key(a) < pair_sort_key(b); });
  std::sort(infinite.begin(), infinite.end(), [](const InfiniteClass& a, const InfiniteClass& b) {
    return std::tie(a.dim, a.birth_order, a.birth) < std::tie(b.dim, b.birth_order, b.birth);
  });
}

std::size_t Diagram::finite_count(int dim) const {
  return std::count_if(pairs.begin(), pairs.end(), [&](const auto& p) { return p.dim == dim; });
}

std::size_t Diagram::infinite_count(int dim) const {
  return std::count_if(infinite.begin(), infinite.end(), [&](const auto& c) { return c.dim == dim; });
}

DiagramSignature signature(const Diagram& d) {
  DiagramSignature out;
  for (const auto& p : d.pairs)
    if (p.birth_order != p.death_order) out.emplace_back(p.dim, p.birth_order, p.death_order);
  for (const auto& c : d.infinite) out.emplace_back(c.dim, c.birth_order, Index{-1});
  std::sort(out.begin(), out.end());
  return out;
}

bool same_diagram(const Diagram& a, const Diagram& b) { return signature(a) == signature(b); }

std::string describe_difference(const Diagram& a, const Diagram& b) {
  const auto sa = signature(a);
  const auto sb = signature(b);
  if (sa == sb) return {};
  DiagramSignature only_a, only_b;
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(only_a));
  std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(only_b));
  std::ostringstream os;
  os << sa.size() << " vs " << sb.size() << " entries";
  auto show = [&](const char* name, const DiagramSignature& s) {
    if (s.empty()) return;
    os << "; only in " << name << ":";
    for (std::size_t i = 0; i < std::min<std::size_t>(s.size(), 5); ++i)
      os << " (" << std::get<0>(s[i]) << "," << std::get<1>(s[i]) << "," << std::get<2>(s[i]) << ")";
    if (s.size() > 5) os << " ...";
  };
  show("first", only_a);
  show("second", only_b);
  return os.str();
}

PersistencePair make_pair(const Grid& grid, std::span<const Index> order, std::span<const double> scalars, int dim,
                          SimplexId birth, SimplexId death) {
  PersistencePair p;
  p.dim = dim;
  p.birth = birth;
  p.death = death;
  p.birth_vertex = top_vertex(grid, order, birth);
  p.death_vertex = top_vertex(grid, order, death);
  p.birth_order = order[p.birth_vertex];
  p.death_order = order[p.death_vertex];
  p.birth_value = scalars[p.birth_vertex];
  p.death_value = scalars[p.death_vertex];
  return p;
}

InfiniteClass make_infinite(const Grid& grid, std::span<const Index> order, std::span<const double> scalars, int dim,
                            SimplexId birth) {
  InfiniteClass c;
  c.dim = dim;
  c.birth = birth;
  c.birth_vertex = top_vertex(grid, order, birth);
  c.birth_order = order[c.birth_vertex];
  c.birth_value = scalars[c.birth_vertex];
  return c;
}

void fill_values(Diagram& d, std::span<const double> scalars) {
  for (auto& p : d.pairs) {
    p.birth_value = scalars[p.birth_vertex];
    p.death_value = scalars[p.death_vertex];
  }
  for (auto& c : d.infinite) c.birth_value = scalars[c.birth_vertex];
}

void write_csv(std::ostream& out, const Diagram& d) {
  out << "dim,birth_order,death_order,birth_value,death_value,birth_simplex,death_simplex,finite\n";
  // Rows ordered by (dim, birth_order); infinite classes sort with their dimension.
  struct Row {
    int dim;
    Index birth_order;
    Index death_order;
    std::string line;
  };
  std::vector<Row> rows;
  for (const auto& p : d.pairs) {
    if (p.birth_order == p.death_order) continue;
    rows.push_back({p.dim, p.birth_order, p.death_order,
                    std::to_string(p.dim) + "," + std::to_string(p.birth_order) + "," + std::to_string(p.death_order) +
                        "," + format_value(p.birth_value) + "," + format_value(p.death_value) + "," +
                        to_string(p.birth) + "," + to_string(p.death) + ",1"});
  }
  for (const auto& c : d.infinite)
    rows.push_back({c.dim, c.birth_order, std::numeric_limits<Index>::max(),
                    std::to_string(c.dim) + "," + std::to_string(c.birth_order) + ",," + format_value(c.birth_value) +
                        ",," + to_string(c.birth) + ",,0"});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.dim, a.birth_order, a.death_order) < std::tie(b.dim, b.birth_order, b.death_order);
  });
  for (const auto& r : rows) out << r.line << "\n";
}

void write_json(std::ostream& out, const Diagram& d) {
  nlohmann::ordered_json j;
  j["pairs"] = nlohmann::ordered_json::array();
  Diagram c = d;
  c.canonicalize();
  for (const auto& p : c.pairs)
    j["pairs"].push_back({{"dim", p.dim},
                          {"birth_order", p.birth_order},
                          {"death_order", p.death_order},
                          {"birth_value", p.birth_value},
                          {"death_value", p.death_value},
                          {"birth_simplex", to_string(p.birth)},
                          {"death_simplex", to_string(p.death)}});
  j["infinite"] = nlohmann::ordered_json::array();
  for (const auto& i : c.infinite)
    j["infinite"].push_back({{"dim", i.dim},
                             {"birth_order", i.birth_order},
                             {"birth_value", i.birth_value},
                             {"birth_simplex", to_string(i.birth)}});
  out << j.dump(2) << "\n";
}

}  // namespace ddms
