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
#include <queue>
#include <string>
#include <vector>

#include "ctcrewrite/errors.h"
#include "ctcrewrite/fst_ops.h"

namespace ctcrewrite {

Fst ProjectOutput(const Fst& fst) {
  Fst out = fst;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s)) arc.ilabel = arc.olabel;
  }
  out.SetInputSymbols(fst.OutputSymbols());
  return out;
}

Fst ProjectInput(const Fst& fst) {
  Fst out = fst;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s)) arc.olabel = arc.ilabel;
  }
  out.SetOutputSymbols(fst.InputSymbols());
  return out;
}

Fst Invert(const Fst& fst) {
  Fst out = fst;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s)) std::swap(arc.ilabel, arc.olabel);
  }
  out.SetInputSymbols(fst.OutputSymbols());
  out.SetOutputSymbols(fst.InputSymbols());
  return out;
}

Fst Connect(const Fst& fst, std::vector<StateId>* state_map) {
  const StateId n = fst.NumStates();
  Fst out(fst.InputSymbols(), fst.OutputSymbols());
  if (state_map) state_map->assign(n, kNoState);
  if (fst.Empty()) return out;

  std::vector<bool> access(n, false), coaccess(n, false);
  std::vector<StateId> stack{fst.Start()};
  access[fst.Start()] = true;
  std::vector<std::vector<StateId>> reverse(n);
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.weight.IsZero()) continue;
      reverse[arc.nextstate].push_back(s);
      if (!access[arc.nextstate]) {
        access[arc.nextstate] = true;
        stack.push_back(arc.nextstate);
      }
    }
  }
  for (StateId s = 0; s < n; ++s) {
    if (access[s] && fst.IsFinal(s)) {
      coaccess[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (StateId p : reverse[s]) {
      if (!coaccess[p]) {
        coaccess[p] = true;
        stack.push_back(p);
      }
    }
  }
  if (!coaccess[fst.Start()]) return out;

  std::vector<StateId> remap(n, kNoState);
  for (StateId s = 0; s < n; ++s) {
    if (access[s] && coaccess[s]) remap[s] = out.AddState();
  }
  out.SetStart(remap[fst.Start()]);
  for (StateId s = 0; s < n; ++s) {
    if (remap[s] == kNoState) continue;
    if (fst.IsFinal(s)) out.SetFinal(remap[s], fst.Final(s));
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.weight.IsZero() || remap[arc.nextstate] == kNoState) continue;
      out.AddArc(remap[s], arc.ilabel, arc.olabel, arc.weight,
                 remap[arc.nextstate]);
    }
  }
  if (state_map) *state_map = std::move(remap);
  return out;
}

Fst Union(std::span<const Fst> fsts) {
  Fst out;
  if (fsts.empty()) return out;
  out.SetInputSymbols(fsts.front().InputSymbols());
  out.SetOutputSymbols(fsts.front().OutputSymbols());
  const StateId start = out.AddState();
  out.SetStart(start);
  for (const Fst& fst : fsts) {
    if (!CompatibleSymbols(fst.InputSymbols(), out.InputSymbols()) ||
        !CompatibleSymbols(fst.OutputSymbols(), out.OutputSymbols())) {
      throw ConfigError("union: symbol tables differ");
    }
    if (fst.Empty()) continue;
    const StateId offset = out.NumStates();
    for (StateId s = 0; s < fst.NumStates(); ++s) out.AddState();
    for (StateId s = 0; s < fst.NumStates(); ++s) {
      if (fst.IsFinal(s)) out.SetFinal(s + offset, fst.Final(s));
      for (Arc arc : fst.Arcs(s)) {
        arc.nextstate += offset;
        out.AddArc(s + offset, arc);
      }
    }
    out.AddArc(start, kEpsilon, kEpsilon, Weight::One(),
               fst.Start() + offset);
  }
  return out;
}

std::vector<StateId> TopologicalOrder(const Fst& fst) {
  const StateId n = fst.NumStates();
  std::vector<int> indegree(n, 0);
  for (StateId s = 0; s < n; ++s) {
    for (const Arc& arc : fst.Arcs(s)) ++indegree[arc.nextstate];
  }
  std::vector<StateId> order;
  order.reserve(n);
  for (StateId s = 0; s < n; ++s) {
    if (indegree[s] == 0) order.push_back(s);
  }
  for (size_t i = 0; i < order.size(); ++i) {
    for (const Arc& arc : fst.Arcs(order[i])) {
      if (--indegree[arc.nextstate] == 0) order.push_back(arc.nextstate);
    }
  }
  if (static_cast<StateId>(order.size()) != n) {
    throw CyclicInputError("FST has a cycle");
  }
  return order;
}

bool IsAcyclic(const Fst& fst) {
  try {
    TopologicalOrder(fst);
    return true;
  } catch (const CyclicInputError&) {
    return false;
  }
}

std::vector<Weight> ForwardDistances(const Fst& fst, Semiring semiring) {
  std::vector<Weight> alpha(fst.NumStates(), Weight::Zero());
  if (fst.Empty()) return alpha;
  alpha[fst.Start()] = Weight::One();
  for (StateId s : TopologicalOrder(fst)) {
    if (alpha[s].IsZero()) continue;
    for (const Arc& arc : fst.Arcs(s)) {
      alpha[arc.nextstate] = Plus(alpha[arc.nextstate],
                                  Times(alpha[s], arc.weight), semiring);
    }
  }
  return alpha;
}

std::vector<Weight> BackwardDistances(const Fst& fst, Semiring semiring) {
  std::vector<Weight> beta(fst.NumStates(), Weight::Zero());
  const auto order = TopologicalOrder(fst);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const StateId s = *it;
    Weight b = fst.Final(s);
    for (const Arc& arc : fst.Arcs(s)) {
      b = Plus(b, Times(arc.weight, beta[arc.nextstate]), semiring);
    }
    beta[s] = b;
  }
  return beta;
}

Weight ShortestDistance(const Fst& fst, Semiring semiring) {
  if (fst.Empty()) {
    TopologicalOrder(fst);
    return Weight::Zero();
  }
  const auto alpha = ForwardDistances(fst, semiring);
  Weight total = Weight::Zero();
  for (StateId s = 0; s < fst.NumStates(); ++s) {
    total = Plus(total, Times(alpha[s], fst.Final(s)), semiring);
  }
  return total;
}

BigInt PathCount(const Fst& fst) {
  const auto order = TopologicalOrder(fst);
  if (fst.Empty()) return 0;
  std::vector<BigInt> count(fst.NumStates(), 0);
  count[fst.Start()] = 1;
  BigInt total = 0;
  for (StateId s : order) {
    if (count[s] == 0) continue;
    if (fst.IsFinal(s)) total += count[s];
    for (const Arc& arc : fst.Arcs(s)) {
      if (!arc.weight.IsZero()) count[arc.nextstate] += count[s];
    }
  }
  return total;
}

namespace {

struct SearchItem {
  double priority;  // cost so far plus exact remaining cost
  double cost;      // cost so far
  StateId state;
  bool complete;
  std::vector<Label> ilabels;
  std::vector<Label> olabels;
};

// Orders the queue so the smallest priority pops first; ties go to the
// lexicographically smaller label sequence, complete paths before partial.
struct SearchItemGreater {
  bool operator()(const SearchItem& a, const SearchItem& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.ilabels != b.ilabels) return a.ilabels > b.ilabels;
    if (a.olabels != b.olabels) return a.olabels > b.olabels;
    return !a.complete && b.complete;
  }
};

}  // namespace

std::vector<WeightedPath> ShortestPaths(const Fst& fst, size_t n) {
  std::vector<WeightedPath> paths;
  if (n == 0 || fst.Empty()) return paths;
  const auto beta = BackwardDistances(fst, Semiring::kTropical);
  if (beta[fst.Start()].IsZero()) return paths;

  std::priority_queue<SearchItem, std::vector<SearchItem>, SearchItemGreater>
      queue;
  queue.push({beta[fst.Start()].Value(), 0.0, fst.Start(), false, {}, {}});
  while (!queue.empty() && paths.size() < n) {
    SearchItem item = queue.top();
    queue.pop();
    if (item.complete) {
      paths.push_back({std::move(item.ilabels), std::move(item.olabels),
                       item.cost});
      continue;
    }
    const StateId s = item.state;
    if (fst.IsFinal(s)) {
      const double cost = item.cost + fst.Final(s).Value();
      queue.push({cost, cost, s, true, item.ilabels, item.olabels});
    }
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.weight.IsZero() || beta[arc.nextstate].IsZero()) continue;
      SearchItem next{0.0, item.cost + arc.weight.Value(), arc.nextstate,
                      false, item.ilabels, item.olabels};
      next.priority = next.cost + beta[arc.nextstate].Value();
      if (arc.ilabel != kEpsilon) next.ilabels.push_back(arc.ilabel);
      if (arc.olabel != kEpsilon) next.olabels.push_back(arc.olabel);
      queue.push(std::move(next));
    }
  }
  return paths;
}

std::vector<WeightedPath> EnumeratePaths(const Fst& fst, size_t max_paths) {
  std::vector<WeightedPath> paths;
  if (fst.Empty()) return paths;
  TopologicalOrder(fst);
  WeightedPath current;
  // Iterative DFS with explicit arc cursors.
  struct Frame {
    StateId state;
    size_t arc;
    double cost;
  };
  std::vector<Frame> stack{{fst.Start(), 0, 0.0}};
  std::vector<std::pair<bool, bool>> pushed;  // whether labels were appended
  auto emit_final = [&](const Frame& f) {
    if (!fst.IsFinal(f.state)) return;
    if (paths.size() >= max_paths) {
      throw BudgetExceededError("path enumeration limit exceeded");
    }
    paths.push_back({current.ilabels, current.olabels,
                     f.cost + fst.Final(f.state).Value()});
  };
  emit_final(stack.back());
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto arcs = fst.Arcs(f.state);
    if (f.arc == arcs.size()) {
      stack.pop_back();
      if (!pushed.empty()) {
        auto [in, out] = pushed.back();
        pushed.pop_back();
        if (in) current.ilabels.pop_back();
        if (out) current.olabels.pop_back();
      }
      continue;
    }
    const Arc& arc = arcs[f.arc++];
    if (arc.weight.IsZero()) continue;
    const bool in = arc.ilabel != kEpsilon;
    const bool out = arc.olabel != kEpsilon;
    if (in) current.ilabels.push_back(arc.ilabel);
    if (out) current.olabels.push_back(arc.olabel);
    pushed.emplace_back(in, out);
    stack.push_back({arc.nextstate, 0, f.cost + arc.weight.Value()});
    emit_final(stack.back());
  }
  return paths;
}

}  // namespace ctcrewrite
