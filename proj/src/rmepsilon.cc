// Copyright (c) 2026 The ctcrewrite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {
namespace {

bool IsEpsArc(const Arc& arc) {
  return arc.ilabel == kEpsilon && arc.olabel == kEpsilon;
}

// Strongly connected components of the epsilon subgraph. Components are
// numbered in completion order, so every epsilon arc leads to a component
// with an equal or smaller number.
std::vector<int> EpsilonComponents(const Fst& fst, int* num_components) {
  const StateId n = fst.NumStates();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<StateId> stack;
  struct Frame {
    StateId state;
    size_t arc;
  };
  std::vector<Frame> dfs;
  int counter = 0;
  int components = 0;
  for (StateId root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    dfs.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!dfs.empty()) {
      Frame& f = dfs.back();
      const auto arcs = fst.Arcs(f.state);
      if (f.arc < arcs.size()) {
        const Arc& arc = arcs[f.arc++];
        if (!IsEpsArc(arc)) continue;
        const StateId next = arc.nextstate;
        if (index[next] == -1) {
          index[next] = low[next] = counter++;
          stack.push_back(next);
          on_stack[next] = true;
          dfs.push_back({next, 0});
        } else if (on_stack[next]) {
          low[f.state] = std::min(low[f.state], index[next]);
        }
        continue;
      }
      const StateId s = f.state;
      dfs.pop_back();
      if (!dfs.empty()) {
        low[dfs.back().state] = std::min(low[dfs.back().state], low[s]);
      }
      if (low[s] == index[s]) {
        StateId member;
        do {
          member = stack.back();
          stack.pop_back();
          on_stack[member] = false;
          comp[member] = components;
        } while (member != s);
        ++components;
      }
    }
  }
  *num_components = components;
  return comp;
}

// Arc list with merging of contributed arcs by (ilabel, olabel, nextstate).
class ArcAccumulator {
 public:
  explicit ArcAccumulator(Semiring semiring) : semiring_(semiring) {}

  void AddOwn(const Arc& arc) {
    index_.try_emplace(KeyOf(arc), arcs_.size());
    arcs_.push_back(arc);
  }

  void Contribute(const Arc& arc) {
    auto [it, inserted] = index_.try_emplace(KeyOf(arc), arcs_.size());
    if (inserted) {
      arcs_.push_back(arc);
    } else {
      Arc& existing = arcs_[it->second];
      existing.weight = Plus(existing.weight, arc.weight, semiring_);
    }
  }

  std::vector<Arc> Take() { return std::move(arcs_); }

 private:
  struct Key {
    Label ilabel, olabel;
    StateId next;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      uint64_t h = static_cast<uint32_t>(k.ilabel);
      h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<uint32_t>(k.olabel);
      h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<uint32_t>(k.next);
      return static_cast<size_t>(h ^ (h >> 29));
    }
  };
  static Key KeyOf(const Arc& a) { return {a.ilabel, a.olabel, a.nextstate}; }

  Semiring semiring_;
  std::vector<Arc> arcs_;
  std::unordered_map<Key, size_t, KeyHash> index_;
};

}  // namespace

Fst RmEpsilon(const Fst& fst, Semiring semiring) {
  const StateId n = fst.NumStates();
  int num_components = 0;
  const std::vector<int> comp = EpsilonComponents(fst, &num_components);
  std::vector<std::vector<StateId>> members(num_components);
  for (StateId s = 0; s < n; ++s) members[comp[s]].push_back(s);

  // Epsilon-free arcs and final weight of every state, computed sinks first.
  std::vector<std::vector<Arc>> closed_arcs(n);
  std::vector<Weight> closed_final(n, Weight::Zero());

  // Arcs and final weight contributed by a state's own non-epsilon arcs and
  // by epsilon arcs leaving its component.
  auto local = [&](StateId s, ArcAccumulator& acc, Weight& final) {
    final = fst.Final(s);
    for (const Arc& arc : fst.Arcs(s)) {
      if (!IsEpsArc(arc)) acc.AddOwn(arc);
    }
    for (const Arc& arc : fst.Arcs(s)) {
      if (!IsEpsArc(arc) || comp[arc.nextstate] == comp[s]) continue;
      const StateId p = arc.nextstate;
      for (const Arc& c : closed_arcs[p]) {
        acc.Contribute({c.ilabel, c.olabel, Times(arc.weight, c.weight),
                        c.nextstate});
      }
      final = Plus(final, Times(arc.weight, closed_final[p]), semiring);
    }
  };

  for (int c = 0; c < num_components; ++c) {
    const auto& mem = members[c];
    bool cyclic = mem.size() > 1;
    if (!cyclic) {
      for (const Arc& arc : fst.Arcs(mem[0])) {
        if (IsEpsArc(arc) && arc.nextstate == mem[0]) cyclic = true;
      }
    }
    if (!cyclic) {
      ArcAccumulator acc(semiring);
      Weight final;
      local(mem[0], acc, final);
      closed_arcs[mem[0]] = acc.Take();
      closed_final[mem[0]] = final;
      continue;
    }

    // Closure matrix of the component by Lehmann's algorithm.
    const size_t m = mem.size();
    std::unordered_map<StateId, size_t> pos;
    for (size_t i = 0; i < m; ++i) pos[mem[i]] = i;
    std::vector<std::vector<Weight>> k(m, std::vector<Weight>(m, Weight::Zero()));
    for (size_t i = 0; i < m; ++i) {
      for (const Arc& arc : fst.Arcs(mem[i])) {
        if (!IsEpsArc(arc) || comp[arc.nextstate] != c) continue;
        Weight& cell = k[i][pos[arc.nextstate]];
        cell = Plus(cell, arc.weight, semiring);
      }
    }
    for (size_t p = 0; p < m; ++p) {
      const Weight star = Star(k[p][p], semiring);
      std::vector<std::vector<Weight>> next = k;
      for (size_t i = 0; i < m; ++i) {
        if (k[i][p].IsZero()) continue;
        const Weight ip = Times(k[i][p], star);
        for (size_t j = 0; j < m; ++j) {
          if (k[p][j].IsZero()) continue;
          next[i][j] = Plus(next[i][j], Times(ip, k[p][j]), semiring);
        }
      }
      k = std::move(next);
    }
    for (size_t i = 0; i < m; ++i) {
      k[i][i] = Plus(k[i][i], Weight::One(), semiring);
    }

    std::vector<std::vector<Arc>> local_arcs(m);
    std::vector<Weight> local_final(m);
    for (size_t i = 0; i < m; ++i) {
      ArcAccumulator acc(semiring);
      local(mem[i], acc, local_final[i]);
      local_arcs[i] = acc.Take();
    }
    for (size_t i = 0; i < m; ++i) {
      ArcAccumulator acc(semiring);
      Weight final = Weight::Zero();
      for (size_t j = 0; j < m; ++j) {
        if (k[i][j].IsZero()) continue;
        for (const Arc& a : local_arcs[j]) {
          acc.Contribute({a.ilabel, a.olabel, Times(k[i][j], a.weight),
                          a.nextstate});
        }
        final = Plus(final, Times(k[i][j], local_final[j]), semiring);
      }
      closed_arcs[mem[i]] = acc.Take();
      closed_final[mem[i]] = final;
    }
  }

  Fst out(fst.InputSymbols(), fst.OutputSymbols());
  out.ReserveStates(n);
  for (StateId s = 0; s < n; ++s) out.AddState();
  if (!fst.Empty()) out.SetStart(fst.Start());
  for (StateId s = 0; s < n; ++s) {
    if (!closed_final[s].IsZero()) out.SetFinal(s, closed_final[s]);
    for (const Arc& arc : closed_arcs[s]) {
      if (!arc.weight.IsZero()) out.AddArc(s, arc);
    }
  }
  return Connect(out);
}

}  // namespace ctcrewrite
