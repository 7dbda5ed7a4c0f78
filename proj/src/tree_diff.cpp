#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dceval/srcdiff.hpp"

namespace dceval::srcdiff {

namespace {

// Per-tree indexes over the nodes reachable from the root.
struct Index {
  const SourceTree& t;
  std::vector<int> pre, post;
  std::vector<int> pre_pos;  // preorder position, -1 when unreachable
  std::vector<int> height, size;
  std::vector<std::uint64_t> hash;

  explicit Index(const SourceTree& tree) : t(tree) {
    const std::size_t n = t.nodes.size();
    pre = t.preorder();
    post = t.postorder();
    pre_pos.assign(n, -1);
    height.assign(n, 0);
    size.assign(n, 0);
    hash.assign(n, 0);
    for (std::size_t i = 0; i < pre.size(); ++i) pre_pos[static_cast<std::size_t>(pre[i])] = static_cast<int>(i);
    for (int id : post) {
      const Node& nd = t.at(id);
      int h = 0, s = 1;
      std::uint64_t x = 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(nd.kind) + 1);
      x ^= std::hash<std::string>{}(nd.label) + 0x9E3779B97F4A7C15ull + (x << 6) + (x >> 2);
      for (int c : nd.children) {
        h = std::max(h, height[static_cast<std::size_t>(c)]);
        s += size[static_cast<std::size_t>(c)];
        x = (x ^ hash[static_cast<std::size_t>(c)]) * 0x100000001B3ull + 0x632BE59BD9B4E019ull;
      }
      height[static_cast<std::size_t>(id)] = h + 1;
      size[static_cast<std::size_t>(id)] = s;
      hash[static_cast<std::size_t>(id)] = x ^ static_cast<std::uint64_t>(nd.children.size());
    }
  }

  int parent(int id) const { return t.at(id).parent; }
  const std::vector<int>& children(int id) const { return t.at(id).children; }
  NodeKind kind(int id) const { return t.at(id).kind; }
  const std::string& label(int id) const { return t.at(id).label; }
  int h(int id) const { return height[static_cast<std::size_t>(id)]; }
  int sz(int id) const { return size[static_cast<std::size_t>(id)]; }
  bool is_descendant(int d, int a) const {
    int pd = pre_pos[static_cast<std::size_t>(d)], pa = pre_pos[static_cast<std::size_t>(a)];
    return pd > pa && pd < pa + sz(a);
  }
  // Descendants of `a` (excluding `a`) in preorder.
  std::vector<int> descendants(int a) const {
    int pa = pre_pos[static_cast<std::size_t>(a)];
    return {pre.begin() + pa + 1, pre.begin() + pa + sz(a)};
  }
  int position(int id) const {
    int p = parent(id);
    if (p < 0) return 0;
    const auto& k = children(p);
    return static_cast<int>(std::find(k.begin(), k.end(), id) - k.begin());
  }
};

struct Matching {
  std::vector<int> m1, m2;
  Matching(std::size_t n1, std::size_t n2) : m1(n1, -1), m2(n2, -1) {}
  void add(int a, int b) {
    m1[static_cast<std::size_t>(a)] = b;
    m2[static_cast<std::size_t>(b)] = a;
  }
  void remove_src(int a) {
    int b = m1[static_cast<std::size_t>(a)];
    if (b >= 0) m2[static_cast<std::size_t>(b)] = -1;
    m1[static_cast<std::size_t>(a)] = -1;
  }
  int of1(int a) const { return m1[static_cast<std::size_t>(a)]; }
  int of2(int b) const { return m2[static_cast<std::size_t>(b)]; }
};

double dice(const Index& a, const Index& b, int x, int y, const Matching& m) {
  if (x < 0 || y < 0) return 0.0;
  auto da = a.descendants(x);
  auto db = b.descendants(y);
  if (da.empty() && db.empty()) return 0.0;
  std::size_t common = 0;
  for (int d : da) {
    int p = m.of1(d);
    if (p >= 0 && b.is_descendant(p, y)) ++common;
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(da.size() + db.size());
}

void map_subtrees(const Index& a, const Index& b, int x, int y, Matching& m) {
  auto da = a.descendants(x);
  auto db = b.descendants(y);
  m.add(x, y);
  for (std::size_t i = 0; i < da.size(); ++i) m.add(da[i], db[i]);
}

void top_down(const Index& a, const Index& b, const DiffOptions& opt, Matching& m) {
  std::vector<int> l1{a.t.root}, l2{b.t.root};
  auto peek = [](const Index& ix, const std::vector<int>& l) {
    int h = 0;
    for (int id : l) h = std::max(h, ix.h(id));
    return h;
  };
  auto pop = [](const Index& ix, std::vector<int>& l, int h) {
    std::vector<int> out, keep;
    for (int id : l) (ix.h(id) == h ? out : keep).push_back(id);
    l.swap(keep);
    return out;
  };
  auto open = [](const Index& ix, std::vector<int>& l, int id) {
    for (int c : ix.children(id)) l.push_back(c);
  };
  struct Candidate {
    int x, y;
  };
  std::vector<Candidate> ambiguous;
  while (std::min(peek(a, l1), peek(b, l2)) >= opt.min_height) {
    int h1 = peek(a, l1), h2 = peek(b, l2);
    if (h1 != h2) {
      if (h1 > h2) {
        for (int id : pop(a, l1, h1)) open(a, l1, id);
      } else {
        for (int id : pop(b, l2, h2)) open(b, l2, id);
      }
      continue;
    }
    auto hs1 = pop(a, l1, h1);
    auto hs2 = pop(b, l2, h2);
    std::vector<int> count1(hs1.size(), 0), count2(hs2.size(), 0);
    std::vector<Candidate> pairs;
    for (std::size_t i = 0; i < hs1.size(); ++i)
      for (std::size_t j = 0; j < hs2.size(); ++j)
        if (a.hash[static_cast<std::size_t>(hs1[i])] == b.hash[static_cast<std::size_t>(hs2[j])] &&
            isomorphic(a.t, hs1[i], b.t, hs2[j])) {
          pairs.push_back({hs1[i], hs2[j]});
          ++count1[i];
          ++count2[j];
        }
    for (std::size_t i = 0; i < hs1.size(); ++i)
      if (count1[i] == 0) open(a, l1, hs1[i]);
    for (std::size_t j = 0; j < hs2.size(); ++j)
      if (count2[j] == 0) open(b, l2, hs2[j]);
    for (const auto& p : pairs) {
      auto i = std::find(hs1.begin(), hs1.end(), p.x) - hs1.begin();
      auto j = std::find(hs2.begin(), hs2.end(), p.y) - hs2.begin();
      if (count1[static_cast<std::size_t>(i)] == 1 && count2[static_cast<std::size_t>(j)] == 1)
        map_subtrees(a, b, p.x, p.y, m);
      else
        ambiguous.push_back(p);
    }
  }
  std::vector<std::pair<double, Candidate>> ranked;
  for (const auto& c : ambiguous) ranked.push_back({dice(a, b, a.parent(c.x), b.parent(c.y), m), c});
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& p, const auto& q) {
    if (p.first != q.first) return p.first > q.first;
    int dp = std::abs(a.position(p.second.x) - b.position(p.second.y));
    int dq = std::abs(a.position(q.second.x) - b.position(q.second.y));
    if (dp != dq) return dp < dq;
    int ap = a.pre_pos[static_cast<std::size_t>(p.second.x)], aq = a.pre_pos[static_cast<std::size_t>(q.second.x)];
    if (ap != aq) return ap < aq;
    return b.pre_pos[static_cast<std::size_t>(p.second.y)] < b.pre_pos[static_cast<std::size_t>(q.second.y)];
  });
  for (const auto& [score, c] : ranked)
    if (m.of1(c.x) < 0 && m.of2(c.y) < 0) map_subtrees(a, b, c.x, c.y, m);
}

// Zhang-Shasha tree edit distance between two subtrees, used to recover
// mappings below a matched pair.
class ZhangShasha {
 public:
  ZhangShasha(const Index& a, int x, const Index& b, int y) : a_(a), b_(b) {
    collect(a, x, na_, la_);
    collect(b, y, nb_, lb_);
    td_.assign(na_.size(), std::vector<int>(nb_.size(), 0));
    fd_.assign(na_.size(), std::vector<int>(nb_.size(), 0));
  }

  std::vector<std::pair<int, int>> mapping() {
    auto ka = keyroots(la_), kb = keyroots(lb_);
    for (int i : ka)
      for (int j : kb) forest(i, j);
    std::vector<std::pair<int, int>> out;
    std::vector<std::pair<int, int>> stack{{static_cast<int>(na_.size()) - 1, static_cast<int>(nb_.size()) - 1}};
    bool root_pair = true;
    while (!stack.empty()) {
      auto [last_row, last_col] = stack.back();
      stack.pop_back();
      if (!root_pair) forest(last_row, last_col);
      root_pair = false;
      int first_row = la_[static_cast<std::size_t>(last_row)] - 1;
      int first_col = lb_[static_cast<std::size_t>(last_col)] - 1;
      int row = last_row, col = last_col;
      while (row > first_row || col > first_col) {
        if (row > first_row && fd(row - 1, col) + 1 == fd(row, col)) {
          --row;
        } else if (col > first_col && fd(row, col - 1) + 1 == fd(row, col)) {
          --col;
        } else if (la_[static_cast<std::size_t>(row)] - 1 == first_row &&
                   lb_[static_cast<std::size_t>(col)] - 1 == first_col) {
          out.push_back({na_[static_cast<std::size_t>(row)], nb_[static_cast<std::size_t>(col)]});
          --row;
          --col;
        } else {
          stack.push_back({row, col});
          row = la_[static_cast<std::size_t>(row)] - 1;
          col = lb_[static_cast<std::size_t>(col)] - 1;
        }
      }
    }
    return out;
  }

 private:
  static constexpr int kNoRename = 1000;

  // 1-based postorder numbering; slot 0 is the empty forest.
  static void collect(const Index& ix, int root, std::vector<int>& nodes, std::vector<int>& leftmost) {
    nodes.assign(1, -1);
    leftmost.assign(1, 0);
    std::vector<int> post;
    std::function<int(int)> walk = [&](int id) -> int {
      int first = -1;
      for (int c : ix.children(id)) {
        int l = walk(c);
        if (first < 0) first = l;
      }
      nodes.push_back(id);
      int me = static_cast<int>(nodes.size()) - 1;
      leftmost.push_back(first < 0 ? me : first);
      return leftmost.back();
    };
    walk(root);
  }

  static std::vector<int> keyroots(const std::vector<int>& leftmost) {
    std::vector<int> out;
    std::vector<bool> seen(leftmost.size() + 1, false);
    for (int i = static_cast<int>(leftmost.size()) - 1; i >= 1; --i) {
      int l = leftmost[static_cast<std::size_t>(i)];
      if (!seen[static_cast<std::size_t>(l)]) {
        out.push_back(i);
        seen[static_cast<std::size_t>(l)] = true;
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  int rename(int i, int j) const {
    int x = na_[static_cast<std::size_t>(i)], y = nb_[static_cast<std::size_t>(j)];
    if (a_.kind(x) != b_.kind(y)) return kNoRename;
    return a_.label(x) == b_.label(y) ? 0 : 1;
  }

  int& fd(int i, int j) { return fd_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  int& td(int i, int j) { return td_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  void forest(int i, int j) {
    int li = la_[static_cast<std::size_t>(i)], lj = lb_[static_cast<std::size_t>(j)];
    fd(li - 1, lj - 1) = 0;
    for (int di = li; di <= i; ++di) fd(di, lj - 1) = fd(di - 1, lj - 1) + 1;
    for (int dj = lj; dj <= j; ++dj) fd(li - 1, dj) = fd(li - 1, dj - 1) + 1;
    for (int di = li; di <= i; ++di) {
      for (int dj = lj; dj <= j; ++dj) {
        int ldi = la_[static_cast<std::size_t>(di)], ldj = lb_[static_cast<std::size_t>(dj)];
        if (ldi == li && ldj == lj) {
          fd(di, dj) = std::min({fd(di - 1, dj) + 1, fd(di, dj - 1) + 1, fd(di - 1, dj - 1) + rename(di, dj)});
          td(di, dj) = fd(di, dj);
        } else {
          fd(di, dj) = std::min({fd(di - 1, dj) + 1, fd(di, dj - 1) + 1, fd(ldi - 1, ldj - 1) + td(di, dj)});
        }
      }
    }
  }

  const Index& a_;
  const Index& b_;
  std::vector<int> na_, nb_, la_, lb_;
  std::vector<std::vector<int>> td_, fd_;
};

// Recovery for subtrees too large for the exact pass: children are paired
// first by an LCS over isomorphic subtrees, then by kinds occurring once on
// each side, recursing into every pair found.
void recover_children(const Index& a, const Index& b, int x, int y, Matching& m) {
  auto unmatched = [](const std::vector<int>& kids, auto&& matched) {
    std::vector<int> out;
    for (int c : kids)
      if (!matched(c)) out.push_back(c);
    return out;
  };
  auto u1 = unmatched(a.children(x), [&](int c) { return m.of1(c) >= 0; });
  auto u2 = unmatched(b.children(y), [&](int c) { return m.of2(c) >= 0; });
  std::vector<std::vector<int>> len(u1.size() + 1, std::vector<int>(u2.size() + 1, 0));
  for (std::size_t i = u1.size(); i-- > 0;)
    for (std::size_t j = u2.size(); j-- > 0;)
      len[i][j] = a.hash[static_cast<std::size_t>(u1[i])] == b.hash[static_cast<std::size_t>(u2[j])] &&
                          isomorphic(a.t, u1[i], b.t, u2[j])
                      ? len[i + 1][j + 1] + 1
                      : std::max(len[i + 1][j], len[i][j + 1]);
  for (std::size_t i = 0, j = 0; i < u1.size() && j < u2.size();) {
    if (a.hash[static_cast<std::size_t>(u1[i])] == b.hash[static_cast<std::size_t>(u2[j])] &&
        isomorphic(a.t, u1[i], b.t, u2[j]) && len[i][j] == len[i + 1][j + 1] + 1) {
      map_subtrees(a, b, u1[i], u2[j], m);
      ++i;
      ++j;
    } else if (len[i + 1][j] >= len[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  u1 = unmatched(a.children(x), [&](int c) { return m.of1(c) >= 0; });
  u2 = unmatched(b.children(y), [&](int c) { return m.of2(c) >= 0; });
  std::map<NodeKind, std::pair<std::vector<int>, std::vector<int>>> by_kind;
  for (int c : u1) by_kind[a.kind(c)].first.push_back(c);
  for (int c : u2) by_kind[b.kind(c)].second.push_back(c);
  for (int c : u1) {
    const auto& [p, q] = by_kind[a.kind(c)];
    if (p.size() == 1 && q.size() == 1) {
      m.add(p[0], q[0]);
      recover_children(a, b, p[0], q[0], m);
    }
  }
}

void last_chance(const Index& a, const Index& b, int x, int y, const DiffOptions& opt, Matching& m) {
  if (std::max(a.sz(x), b.sz(y)) > opt.max_recovery_size) {
    recover_children(a, b, x, y, m);
    return;
  }
  ZhangShasha zs(a, x, b, y);
  for (auto [p, q] : zs.mapping())
    if (m.of1(p) < 0 && m.of2(q) < 0 && a.kind(p) == b.kind(q)) m.add(p, q);
}

void bottom_up(const Index& a, const Index& b, const DiffOptions& opt, Matching& m) {
  for (int x : a.post) {
    if (x == a.t.root) {
      int y = b.t.root;
      if (m.of1(x) < 0 && m.of2(y) < 0 && a.kind(x) == b.kind(y)) m.add(x, y);
      if (m.of1(x) == y) last_chance(a, b, x, y, opt, m);
      break;
    }
    if (m.of1(x) >= 0 || a.children(x).empty()) continue;
    std::vector<int> candidates;
    std::unordered_set<int> seen;
    for (int d : a.descendants(x)) {
      int p = m.of1(d);
      if (p < 0) continue;
      for (int anc = b.parent(p); anc >= 0; anc = b.parent(anc)) {
        if (!seen.insert(anc).second) break;
        if (m.of2(anc) < 0 && b.kind(anc) == a.kind(x)) candidates.push_back(anc);
      }
    }
    int best = -1;
    double best_sim = -1.0;
    for (int c : candidates) {
      double s = dice(a, b, x, c, m);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    if (best >= 0 && best_sim >= opt.min_dice) {
      m.add(x, best);
      last_chance(a, b, x, best, opt, m);
    }
  }
}

// Length of the longest increasing subsequence; used as the LCS of two
// sequences of distinct mapped elements.
std::size_t lis(const std::vector<int>& v) {
  std::vector<int> tails;
  for (int x : v) {
    auto it = std::lower_bound(tails.begin(), tails.end(), x);
    if (it == tails.end()) tails.push_back(x);
    else *it = x;
  }
  return tails.size();
}

std::size_t cost_of(const Index& a, const Index& b, const Matching& m) {
  std::size_t cost = 0;
  for (int x : a.pre) {
    int y = m.of1(x);
    if (y < 0) {
      ++cost;
      continue;
    }
    if (a.label(x) != b.label(y)) ++cost;
    int px = a.parent(x), py = b.parent(y);
    int mapped_parent = px < 0 ? -1 : m.of1(px);
    if (px < 0 ? py >= 0 : mapped_parent != py || py < 0) ++cost;
  }
  for (int y : b.pre)
    if (m.of2(y) < 0) ++cost;
  auto misaligned = [&](const std::vector<int>& kids2, int parent1) {
    std::vector<int> pos;
    std::vector<int> ordered;
    for (int c : kids2) {
      int p = m.of2(c);
      if (p >= 0 && a.parent(p) == parent1) ordered.push_back(c);
    }
    if (ordered.size() < 2) return std::size_t{0};
    const auto& kids1 = parent1 < 0 ? std::vector<int>{a.t.root} : a.children(parent1);
    for (int c : kids1) {
      int q = m.of1(c);
      if (q < 0) continue;
      auto it = std::find(ordered.begin(), ordered.end(), q);
      if (it != ordered.end()) pos.push_back(static_cast<int>(it - ordered.begin()));
    }
    return ordered.size() - lis(pos);
  };
  for (int y : b.pre) {
    int x = m.of2(y);
    if (x >= 0) cost += misaligned(b.children(y), x);
  }
  return cost;
}

void refine(const Index& a, const Index& b, Matching& m) {
  std::size_t current = cost_of(a, b, m);
  while (current > 0) {
    std::size_t best = current;
    std::function<void(Matching&)> best_change;
    auto consider = [&](const std::function<void(Matching&)>& change) {
      Matching trial = m;
      change(trial);
      std::size_t c = cost_of(a, b, trial);
      if (c < best) {
        best = c;
        best_change = change;
      }
    };
    for (int x : a.pre) {
      if (m.of1(x) >= 0) consider([x](Matching& t) { t.remove_src(x); });
      for (int y : b.pre) {
        if (a.kind(x) != b.kind(y) || m.of1(x) == y) continue;
        consider([x, y](Matching& t) {
          t.remove_src(x);
          int old = t.of2(y);
          if (old >= 0) t.remove_src(old);
          t.add(x, y);
        });
      }
    }
    for (std::size_t i = 0; i < a.pre.size(); ++i) {
      int x1 = a.pre[i], y1 = m.of1(x1);
      if (y1 < 0) continue;
      for (std::size_t j = i + 1; j < a.pre.size(); ++j) {
        int x2 = a.pre[j], y2 = m.of1(x2);
        if (y2 < 0 || a.kind(x1) != a.kind(x2)) continue;
        consider([x1, x2, y1, y2](Matching& t) {
          t.add(x1, y2);
          t.add(x2, y1);
        });
      }
    }
    if (!best_change) break;
    best_change(m);
    current = best;
  }
}

// Number of kind-preserving partial injections from a's nodes into b's, capped
// just above `limit`.
std::size_t count_mappings(const Index& a, const Index& b, std::size_t limit) {
  std::map<NodeKind, std::pair<std::size_t, std::size_t>> per_kind;
  for (int x : a.pre) ++per_kind[a.kind(x)].first;
  for (int y : b.pre) ++per_kind[b.kind(y)].second;
  std::size_t total = 1;
  for (auto [kind, counts] : per_kind) {
    auto [p, q] = counts;
    // sum over k of C(p,k) * C(q,k) * k!
    std::size_t sum = 0, term = 1;
    for (std::size_t k = 0; k <= std::min(p, q); ++k) {
      sum += term;
      if (sum > limit) return limit + 1;
      term = term * (p - k) * (q - k) / (k + 1);
    }
    if (total > (limit + 1) / sum + 1) return limit + 1;
    total *= sum;
    if (total > limit) return limit + 1;
  }
  return total;
}

void exhaustive(const Index& a, const Index& b, Matching& m) {
  std::size_t best = cost_of(a, b, m);
  Matching trial(m.m1.size(), m.m2.size());
  std::function<void(std::size_t)> assign = [&](std::size_t i) {
    if (best == 0) return;
    if (i == a.pre.size()) {
      std::size_t c = cost_of(a, b, trial);
      if (c < best) {
        best = c;
        m = trial;
      }
      return;
    }
    int x = a.pre[i];
    assign(i + 1);
    for (int y : b.pre) {
      if (trial.of2(y) >= 0 || a.kind(x) != b.kind(y)) continue;
      trial.add(x, y);
      assign(i + 1);
      trial.remove_src(x);
    }
  };
  assign(0);
}

Mapping to_mapping(const Index& a, const Matching& m) {
  Mapping out;
  for (int x : a.pre)
    if (m.of1(x) >= 0) out.push_back({x, m.of1(x)});
  return out;
}

Matching from_mapping(const SourceTree& a, const SourceTree& b, const Mapping& mapping) {
  Matching m(a.nodes.size(), b.nodes.size());
  for (auto [x, y] : mapping) {
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= a.nodes.size() ||
        static_cast<std::size_t>(y) >= b.nodes.size())
      throw std::invalid_argument("mapping refers to a missing node");
    if (a.at(x).kind != b.at(y).kind) throw std::invalid_argument("mapping pairs nodes of different kinds");
    if (m.of1(x) >= 0 || m.of2(y) >= 0) throw std::invalid_argument("mapping is not one-to-one");
    m.add(x, y);
  }
  return m;
}

// Mutable tree used both to generate and to replay scripts. Index -1 is the
// virtual root.
struct WorkTree {
  struct WNode {
    NodeKind kind;
    std::string label;
    int parent = -1;
    std::vector<int> children;
    bool alive = true;
  };
  std::vector<WNode> nodes;
  std::vector<int> top;

  explicit WorkTree(const SourceTree& t) {
    nodes.resize(t.nodes.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      nodes[i].kind = t.nodes[i].kind;
      nodes[i].label = t.nodes[i].label;
      nodes[i].alive = false;
    }
    for (int id : t.preorder()) {
      auto& n = nodes[static_cast<std::size_t>(id)];
      n.alive = true;
      n.children = t.at(id).children;
      n.parent = t.at(id).parent;
    }
    if (t.root >= 0) {
      top.push_back(t.root);
      nodes[static_cast<std::size_t>(t.root)].parent = -1;
    }
  }

  bool exists(int id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes.size() && nodes[id].alive; }
  WNode& at(int id) { return nodes[static_cast<std::size_t>(id)]; }
  std::vector<int>& kids(int id) { return id < 0 ? top : at(id).children; }
  int index_in_parent(int id) {
    auto& k = kids(at(id).parent);
    return static_cast<int>(std::find(k.begin(), k.end(), id) - k.begin());
  }
  void detach(int id) {
    auto& k = kids(at(id).parent);
    k.erase(std::find(k.begin(), k.end(), id));
    at(id).parent = -1;
  }
  void attach(int id, int parent, std::size_t pos) {
    auto& k = kids(parent);
    if (pos > k.size()) throw std::invalid_argument("position out of range");
    k.insert(k.begin() + static_cast<std::ptrdiff_t>(pos), id);
    at(id).parent = parent;
  }
  int create(NodeKind kind, const std::string& label) {
    WNode n;
    n.kind = kind;
    n.label = label;
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size() - 1);
  }
  bool inside(int node, int ancestor) {
    for (int p = node; p >= 0; p = at(p).parent)
      if (p == ancestor) return true;
    return false;
  }
  std::vector<int> postorder() {
    std::vector<int> out;
    std::function<void(int)> walk = [&](int id) {
      for (int c : at(id).children) walk(c);
      out.push_back(id);
    };
    for (int r : top) walk(r);
    return out;
  }
};

}  // namespace

std::string_view to_string(ActionType type) {
  switch (type) {
    case ActionType::Insert: return "Insert";
    case ActionType::Delete: return "Delete";
    case ActionType::Update: return "Update";
    case ActionType::Move: return "Move";
  }
  return "?";
}

std::string Action::to_text() const {
  std::string head = std::string(srcdiff::to_string(type)) + " " + std::string(srcdiff::to_string(kind));
  std::string quoted = label.empty() ? "" : " '" + label + "'";
  switch (type) {
    case ActionType::Insert:
      return head + quoted + " as #" + std::to_string(node) + " into #" + std::to_string(parent) + " @" +
             std::to_string(position);
    case ActionType::Delete: return head + quoted + " #" + std::to_string(node);
    case ActionType::Update: return head + " #" + std::to_string(node) + " '" + old_label + "' -> '" + label + "'";
    case ActionType::Move:
      return head + quoted + " #" + std::to_string(node) + " into #" + std::to_string(parent) + " @" +
             std::to_string(position);
  }
  return head;
}

Mapping match_trees(const SourceTree& original, const SourceTree& decompiled, const DiffOptions& options) {
  Index a(original), b(decompiled);
  Matching m(original.nodes.size(), decompiled.nodes.size());
  if (original.root < 0 || decompiled.root < 0) return {};
  top_down(a, b, options, m);
  bottom_up(a, b, options, m);
  if (count_mappings(a, b, options.exact_limit) <= options.exact_limit) exhaustive(a, b, m);
  else if (a.pre.size() * b.pre.size() <= options.refine_limit) refine(a, b, m);
  return to_mapping(a, m);
}

std::size_t script_cost(const SourceTree& original, const SourceTree& decompiled, const Mapping& mapping) {
  Index a(original), b(decompiled);
  return cost_of(a, b, from_mapping(original, decompiled, mapping));
}

EditScript generate_script(const SourceTree& original, const SourceTree& decompiled, const Mapping& mapping) {
  Index b(decompiled);
  Matching m = from_mapping(original, decompiled, mapping);
  WorkTree w(original);
  std::vector<int> partner_w(original.nodes.size(), -1);
  std::vector<int> partner_2(decompiled.nodes.size(), -1);
  for (auto [x, y] : mapping) {
    partner_w[static_cast<std::size_t>(x)] = y;
    partner_2[static_cast<std::size_t>(y)] = x;
  }
  std::vector<bool> in_order_w(original.nodes.size(), false);
  std::vector<bool> in_order_2(decompiled.nodes.size(), false);
  auto pw = [&](int id) -> int& {
    if (static_cast<std::size_t>(id) >= partner_w.size()) {
      partner_w.resize(static_cast<std::size_t>(id) + 1, -1);
      in_order_w.resize(static_cast<std::size_t>(id) + 1, false);
    }
    return partner_w[static_cast<std::size_t>(id)];
  };
  auto set_ow = [&](int id, bool v) {
    pw(id);
    in_order_w[static_cast<std::size_t>(id)] = v;
  };
  const std::vector<int> top2{decompiled.root};
  auto kids2 = [&](int y) -> const std::vector<int>& { return y < 0 ? top2 : decompiled.at(y).children; };

  EditScript script;
  auto find_pos = [&](int x) -> std::size_t {
    const auto& siblings = kids2(decompiled.at(x).parent);
    for (int c : siblings) {
      if (in_order_2[static_cast<std::size_t>(c)]) {
        if (c == x) return 0;
        break;
      }
    }
    int v = -1;
    for (int c : siblings) {
      if (c == x) break;
      if (in_order_2[static_cast<std::size_t>(c)]) v = c;
    }
    if (v < 0) return 0;
    int u = partner_2[static_cast<std::size_t>(v)];
    return static_cast<std::size_t>(w.index_in_parent(u)) + 1;
  };

  auto align = [&](int wn, int x) {
    auto& wk = w.kids(wn);
    for (int c : wk) set_ow(c, false);
    for (int c : kids2(x)) in_order_2[static_cast<std::size_t>(c)] = false;
    std::vector<int> s1, s2;
    for (int c : wk) {
      int p = pw(c);
      if (p >= 0 && decompiled.at(p).parent == x) s1.push_back(c);
    }
    for (int c : kids2(x)) {
      int p = partner_2[static_cast<std::size_t>(c)];
      if (p >= 0 && w.at(p).parent == wn && w.exists(p)) s2.push_back(c);
    }
    // LCS of s1 (through the mapping) and s2 via patience sorting on s2 positions.
    std::vector<int> seq;
    for (int c : s1) seq.push_back(static_cast<int>(std::find(s2.begin(), s2.end(), pw(c)) - s2.begin()));
    std::vector<int> tails, tails_idx, prev(seq.size(), -1);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto it = std::lower_bound(tails.begin(), tails.end(), seq[i]);
      std::size_t k = static_cast<std::size_t>(it - tails.begin());
      if (it == tails.end()) {
        tails.push_back(seq[i]);
        tails_idx.push_back(static_cast<int>(i));
      } else {
        *it = seq[i];
        tails_idx[k] = static_cast<int>(i);
      }
      prev[i] = k > 0 ? tails_idx[k - 1] : -1;
    }
    std::vector<bool> kept(s2.size(), false);
    for (int i = tails_idx.empty() ? -1 : tails_idx.back(); i >= 0; i = prev[static_cast<std::size_t>(i)])
      kept[static_cast<std::size_t>(seq[static_cast<std::size_t>(i)])] = true;
    for (std::size_t j = 0; j < s2.size(); ++j) {
      if (!kept[j]) continue;
      in_order_2[static_cast<std::size_t>(s2[j])] = true;
      set_ow(partner_2[static_cast<std::size_t>(s2[j])], true);
    }
    for (std::size_t j = 0; j < s2.size(); ++j) {
      if (kept[j]) continue;
      int y = s2[j];
      int aw = partner_2[static_cast<std::size_t>(y)];
      w.detach(aw);
      std::size_t k = find_pos(y);
      w.attach(aw, wn, k);
      script.actions.push_back({ActionType::Move, aw, w.at(aw).kind, w.at(aw).label, "", wn, k});
      in_order_2[static_cast<std::size_t>(y)] = true;
      set_ow(aw, true);
    }
  };

  if (decompiled.root >= 0) {
    align(-1, -1);
    std::deque<int> queue{decompiled.root};
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      const Node& nx = decompiled.at(x);
      int z = nx.parent < 0 ? -1 : partner_2[static_cast<std::size_t>(nx.parent)];
      int wn = partner_2[static_cast<std::size_t>(x)];
      if (wn < 0) {
        std::size_t k = find_pos(x);
        wn = w.create(nx.kind, nx.label);
        w.attach(wn, z, k);
        pw(wn) = x;
        partner_2[static_cast<std::size_t>(x)] = wn;
        script.actions.push_back({ActionType::Insert, wn, nx.kind, nx.label, "", z, k});
      } else {
        if (w.at(wn).label != nx.label) {
          script.actions.push_back({ActionType::Update, wn, nx.kind, nx.label, w.at(wn).label, -1, 0});
          w.at(wn).label = nx.label;
        }
        if (w.at(wn).parent != z) {
          w.detach(wn);
          std::size_t k = find_pos(x);
          w.attach(wn, z, k);
          script.actions.push_back({ActionType::Move, wn, nx.kind, nx.label, "", z, k});
        }
      }
      in_order_2[static_cast<std::size_t>(x)] = true;
      set_ow(wn, true);
      align(wn, x);
      for (int c : nx.children) queue.push_back(c);
    }
  }
  for (int id : w.postorder()) {
    if (pw(id) >= 0) continue;
    script.actions.push_back({ActionType::Delete, id, w.at(id).kind, w.at(id).label, "", -1, 0});
    w.detach(id);
    w.at(id).alive = false;
  }
  return script;
}

EditScript diff(const SourceTree& original, const SourceTree& decompiled, const DiffOptions& options) {
  return generate_script(original, decompiled, match_trees(original, decompiled, options));
}

SourceTree apply_script(const SourceTree& original, const EditScript& script) {
  WorkTree w(original);
  auto fail = [](const Action& a, const std::string& why) {
    throw std::invalid_argument("cannot apply '" + a.to_text() + "': " + why);
  };
  for (const auto& a : script.actions) {
    switch (a.type) {
      case ActionType::Insert: {
        if (a.node != static_cast<int>(w.nodes.size())) fail(a, "inserted ids must be allocated in order");
        if (a.parent >= 0 && !w.exists(a.parent)) fail(a, "unknown parent");
        int id = w.create(a.kind, a.label);
        if (a.position > w.kids(a.parent).size()) fail(a, "position out of range");
        w.attach(id, a.parent, a.position);
        break;
      }
      case ActionType::Delete:
        if (!w.exists(a.node)) fail(a, "unknown node");
        if (!w.at(a.node).children.empty()) fail(a, "node is not a leaf");
        w.detach(a.node);
        w.at(a.node).alive = false;
        break;
      case ActionType::Update:
        if (!w.exists(a.node)) fail(a, "unknown node");
        if (w.at(a.node).kind != a.kind) fail(a, "kind mismatch");
        w.at(a.node).label = a.label;
        break;
      case ActionType::Move:
        if (!w.exists(a.node)) fail(a, "unknown node");
        if (a.parent >= 0 && (!w.exists(a.parent) || w.inside(a.parent, a.node))) fail(a, "bad target parent");
        w.detach(a.node);
        if (a.position > w.kids(a.parent).size()) fail(a, "position out of range");
        w.attach(a.node, a.parent, a.position);
        break;
    }
  }
  if (w.top.size() != 1) throw std::invalid_argument("script leaves " + std::to_string(w.top.size()) + " roots");
  SourceTree out;
  std::function<void(int, int)> build = [&](int id, int parent) {
    int me = out.add(w.at(id).kind, w.at(id).label, parent);
    for (int c : w.at(id).children) build(c, me);
  };
  build(w.top[0], -1);
  return out;
}

}  // namespace dceval::srcdiff
