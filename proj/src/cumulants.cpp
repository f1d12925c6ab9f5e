#include "freeprob/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace freeprob {

// ---------------------------------------------------------------------------
// Moment-cumulant recursion
// ---------------------------------------------------------------------------

FreeCumulantSequence free_cumulants_from_moments(const MomentSequence& m) {
  const std::size_t N = m.order();
  if (m.entries.empty() || m.entries[0] != 1) throw NotAMomentSequenceError("m_0 must equal 1");
  if (N < 1) throw TruncationError("free cumulants need at least m_1");
  // power[s][j] = [z^j] M(z)^s for j <= N - 1.
  std::vector<std::vector<Rational>> power(N + 1, std::vector<Rational>(N, Rational(0)));
  for (std::size_t j = 0; j < N; ++j) power[1][j] = m.entries[j];
  for (std::size_t s = 2; s <= N; ++s)
    for (std::size_t j = 0; j < N; ++j) {
      Rational acc = 0;
      for (std::size_t i = 0; i <= j; ++i) acc += m.entries[i] * power[s - 1][j - i];
      power[s][j] = acc;
    }
  FreeCumulantSequence k;
  k.entries.resize(N);
  for (std::size_t n = 1; n <= N; ++n) {
    Rational acc = m.entries[n];
    for (std::size_t s = 1; s < n; ++s) acc -= k.entries[s - 1] * power[s][n - s];
    k.entries[n - 1] = acc;
  }
  return k;
}

MomentSequence moments_from_free_cumulants(const FreeCumulantSequence& k) {
  const std::size_t N = k.order();
  MomentSequence m;
  m.entries.assign(N + 1, Rational(0));
  m.entries[0] = 1;
  if (N == 0) return m;
  // power[s][j] filled column by column as m_j becomes known.
  std::vector<std::vector<Rational>> power(N + 1, std::vector<Rational>(N, Rational(0)));
  auto fill_column = [&](std::size_t j) {
    power[1][j] = m.entries[j];
    for (std::size_t s = 2; s <= N; ++s) {
      Rational acc = 0;
      for (std::size_t i = 0; i <= j; ++i) acc += m.entries[i] * power[s - 1][j - i];
      power[s][j] = acc;
    }
  };
  fill_column(0);
  for (std::size_t n = 1; n <= N; ++n) {
    Rational acc = 0;
    for (std::size_t s = 1; s <= n; ++s) acc += k.entries[s - 1] * power[s][n - s];
    m.entries[n] = acc;
    if (n < N) fill_column(n);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Non-crossing partitions
// ---------------------------------------------------------------------------

namespace {

using Blocks = std::vector<std::vector<int>>;

const std::vector<Blocks>& partitions_of_length(int len, std::map<int, std::vector<Blocks>>& memo) {
  auto it = memo.find(len);
  if (it != memo.end()) return it->second;
  std::vector<Blocks> out;
  if (len == 0) {
    out.push_back({});
  } else {
    // The block containing 0 splits the rest into independent intervals.
    for (unsigned mask = 0; mask < (1u << (len - 1)); ++mask) {
      std::vector<int> first{0};
      for (int b = 1; b < len; ++b)
        if (mask & (1u << (b - 1))) first.push_back(b);
      std::vector<std::pair<int, int>> gaps;  // (offset, length)
      for (std::size_t i = 0; i < first.size(); ++i) {
        int from = first[i] + 1;
        int to = i + 1 < first.size() ? first[i + 1] : len;
        if (to > from) gaps.emplace_back(from, to - from);
      }
      std::vector<Blocks> partial{Blocks{first}};
      for (auto [offset, glen] : gaps) {
        const auto& sub = partitions_of_length(glen, memo);
        std::vector<Blocks> grown;
        grown.reserve(partial.size() * sub.size());
        for (const auto& base : partial)
          for (const auto& s : sub) {
            Blocks b = base;
            for (auto blk : s) {
              for (int& x : blk) x += offset;
              b.push_back(std::move(blk));
            }
            grown.push_back(std::move(b));
          }
        partial = std::move(grown);
      }
      for (auto& p : partial) out.push_back(std::move(p));
    }
  }
  return memo.emplace(len, std::move(out)).first->second;
}

Rational catalan(int n) {
  mpz_class c = 1;
  for (int i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return Rational(c);
}

}  // namespace

std::vector<NCPartition> nc_partitions(int n) {
  if (n < 0) throw DomainError("partition size must be non-negative");
  if (n > kNcOrderCap) throw OrderCapError("non-crossing enumeration is capped at n = 12");
  std::map<int, std::vector<Blocks>> memo;
  const auto& raw = partitions_of_length(n, memo);
  std::vector<NCPartition> out;
  out.reserve(raw.size());
  for (const auto& blocks : raw) {
    NCPartition p;
    for (const auto& blk : blocks) {
      std::vector<int> b(blk);
      for (int& x : b) ++x;
      p.blocks.push_back(std::move(b));
    }
    std::sort(p.blocks.begin(), p.blocks.end());
    out.push_back(std::move(p));
  }
  return out;
}

bool is_non_crossing(const NCPartition& p) {
  std::map<int, std::size_t> owner;
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    for (int x : p.blocks[b]) owner[x] = b;
  std::vector<std::pair<int, std::size_t>> seq(owner.begin(), owner.end());
  const std::size_t n = seq.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d)
          if (seq[a].second == seq[c].second && seq[b].second == seq[d].second &&
              seq[a].second != seq[b].second)
            return false;
  return true;
}

Rational nc_moebius_to_top(const NCPartition& p, int n) {
  // [pi, 1_n] is a product of NC lattices indexed by the cycles of P_pi^{-1} gamma
  // (the Kreweras complement), and mu(0_k, 1_k) = (-1)^{k-1} Cat_{k-1}.
  std::vector<int> next_in_block(static_cast<std::size_t>(n) + 1), prev_in_block(static_cast<std::size_t>(n) + 1);
  for (const auto& blk : p.blocks)
    for (std::size_t i = 0; i < blk.size(); ++i) {
      int a = blk[i], b = blk[(i + 1) % blk.size()];
      next_in_block[a] = b;
      prev_in_block[b] = a;
    }
  std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
  Rational mu = 1;
  for (int start = 1; start <= n; ++start) {
    if (seen[start]) continue;
    int len = 0;
    int x = start;
    while (!seen[x]) {
      seen[x] = true;
      ++len;
      int g = x % n + 1;
      x = prev_in_block[g];
    }
    Rational s = catalan(len - 1);
    if (len % 2 == 0) s = -s;
    mu *= s;
  }
  return mu;
}

Rational nc_partition_oracle(const MomentSequence& m, int n) {
  if (n < 1) throw DomainError("cumulant order must be at least 1");
  if (n > kNcOrderCap) throw OrderCapError("non-crossing enumeration is capped at n = 12");
  if (m.order() < static_cast<std::size_t>(n)) throw TruncationError("not enough moments for the oracle");
  Rational total = 0;
  for (const auto& p : nc_partitions(n)) {
    Rational term = nc_moebius_to_top(p, n);
    for (const auto& blk : p.blocks) term *= m.entries[blk.size()];
    total += term;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Exact PSD decision
// ---------------------------------------------------------------------------

PsdDecision decide_psd(const RationalMatrix& A) {
  const std::size_t n = A.size();
  for (const auto& row : A)
    if (row.size() != n) throw DomainError("matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (A[i][j] != A[j][i]) throw DomainError("matrix must be symmetric");

  PsdDecision out;
  RationalMatrix S = A;
  std::vector<bool> active(n, true);
  struct Step {
    std::size_t p;
    Rational d;
    std::vector<Rational> row;  // S_{p,j} at the time of pivoting
  };
  std::vector<Step> steps;
  std::vector<Rational> u(n, Rational(0));
  bool violated = false;

  while (true) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i] && S[i][i] > 0 && (!best || S[i][i] > S[*best][*best])) best = i;
    if (!best) {
      for (std::size_t i = 0; i < n && !violated; ++i)
        if (active[i] && S[i][i] < 0) {
          u[i] = 1;
          violated = true;
        }
      for (std::size_t i = 0; i < n && !violated; ++i)
        for (std::size_t j = i + 1; j < n && !violated; ++j)
          if (active[i] && active[j] && S[i][j] != 0) {
            u[i] = 1;
            u[j] = S[i][j] > 0 ? -1 : 1;
            violated = true;
          }
      break;
    }
    std::size_t p = *best;
    Step st{p, S[p][p], S[p]};
    active[p] = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || S[i][p] == 0) continue;
      Rational f = S[i][p] / st.d;
      for (std::size_t j = 0; j < n; ++j)
        if (active[j]) S[i][j] -= f * st.row[j];
    }
    out.pivot_order.push_back(p);
    out.pivots.push_back(st.d);
    steps.push_back(std::move(st));
  }
  out.rank = steps.size();
  if (!violated) return out;

  // Lift the Schur-complement witness back through the eliminated pivots.
  std::vector<bool> alive(n, false);
  for (std::size_t i = 0; i < n; ++i) alive[i] = active[i];
  for (std::size_t s = steps.size(); s-- > 0;) {
    const Step& st = steps[s];
    Rational acc = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (alive[j]) acc += st.row[j] * u[j];
    u[st.p] = -acc / st.d;
    alive[st.p] = true;
  }
  Rational value = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) value += u[i] * A[i][j] * u[j];
  out.psd = false;
  out.witness = u;
  out.witness_value = value;
  if (value >= 0) throw Error("internal: PSD witness failed to certify");
  return out;
}

Rational determinant(const RationalMatrix& A) {
  const std::size_t n = A.size();
  RationalMatrix M = A;
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && M[piv][c] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      std::swap(M[piv], M[c]);
      det = -det;
    }
    det *= M[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (M[r][c] == 0) continue;
      Rational f = M[r][c] / M[c][c];
      for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
    }
  }
  return det;
}

HankelReport is_conditionally_positive_definite(const std::vector<Rational>& a, std::size_t N) {
  if (a.size() < 2 * N) throw TruncationError("sequence shorter than 2N");
  HankelReport h;
  h.order = N;
  h.matrix.assign(N, std::vector<Rational>(N));
  for (std::size_t i = 1; i <= N; ++i)
    for (std::size_t j = 1; j <= N; ++j) h.matrix[i - 1][j - 1] = a[i + j - 1];
  for (std::size_t k = 1; k <= N; ++k) {
    RationalMatrix lead(k, std::vector<Rational>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) lead[i][j] = h.matrix[i][j];
    h.leading_minors.push_back(determinant(lead));
    if (!h.failing_minor && h.leading_minors.back() < 0) h.failing_minor = k;
  }
  PsdDecision d = decide_psd(h.matrix);
  h.psd = d.psd;
  h.rank = d.rank;
  h.pivots = d.pivots;
  h.witness = d.witness;
  h.witness_value = d.witness_value;
  h.note = "positive semidefinite test (rank-deficient Hankel matrices accepted)";
  return h;
}

namespace {

CheckReport hankel_check(const std::string& name, const std::vector<Rational>& kappa,
                         const std::vector<Rational>& a, std::size_t N, bool compact,
                         const std::string& law) {
  HankelReport h = is_conditionally_positive_definite(a, N);
  CheckReport r;
  r.check = name;
  r.tolerance = 0.0;
  r.evaluated = 1;
  if (h.psd) {
    r.verdict = Verdict::Pass;
    double smallest = 0.0;
    if (h.rank == N && !h.pivots.empty()) {
      smallest = to_double(h.pivots.front());
      for (const auto& p : h.pivots) smallest = std::min(smallest, to_double(p));
    }
    r.margin = -smallest;
    r.statement = compact ? "consistent with " + law + " up to order " + std::to_string(N) +
                                 "; for compact support, positivity at every order is equivalent to " + law
                          : "consistent with " + law + " up to order " + std::to_string(N) +
                                 "; without compact support this is a necessary condition only";
  } else {
    r.verdict = Verdict::Fail;
    Rational norm = 0;
    for (const auto& x : *h.witness) norm += x * x;
    r.margin = to_double(Rational(-h.witness_value / norm));
    r.statement = "not " + law + ": the Hankel matrix of order " + std::to_string(N) +
                  " is not positive semidefinite (exact witness attached)";
  }
  Json ks = Json::array(), as = Json::array();
  for (const auto& k : kappa) ks.push_back(to_json(k));
  for (const auto& x : a) as.push_back(to_json(x));
  r.details["free_cumulants"] = ks;
  r.details["sequence"] = as;
  r.details["compact_support"] = compact;
  r.details["hankel"] = to_json(h);
  return r;
}

}  // namespace

CheckReport fsd_cumulant_criterion(const MomentSequence& m, std::size_t N, bool compact_support) {
  if (m.order() < 2 * N) throw TruncationError("FSD Hankel test of order N needs moments up to 2N");
  FreeCumulantSequence k = free_cumulants_from_moments(m);
  std::vector<Rational> a;
  for (std::size_t n = 1; n <= 2 * N; ++n) a.push_back(Rational(static_cast<long>(n)) * k.kappa(n));
  std::vector<Rational> kappa(k.entries.begin(), k.entries.begin() + static_cast<long>(2 * N));
  auto r = hankel_check("fsd_cumulant", kappa, a, N, compact_support, "free selfdecomposability");
  r.details["sequence_kind"] = "n * kappa_n";
  return r;
}

CheckReport fid_cumulant_criterion(const MomentSequence& m, std::size_t N, bool compact_support) {
  if (m.order() < 2 * N) throw TruncationError("FID Hankel test of order N needs moments up to 2N");
  FreeCumulantSequence k = free_cumulants_from_moments(m);
  std::vector<Rational> a(k.entries.begin(), k.entries.begin() + static_cast<long>(2 * N));
  auto r = hankel_check("fid_cumulant", a, a, N, compact_support, "free infinite divisibility");
  r.details["sequence_kind"] = "kappa_n";
  return r;
}

GrowthEstimate exponential_growth_check(const FreeCumulantSequence& k) {
  if (k.order() < 4) throw TruncationError("growth estimate needs at least four cumulants");
  GrowthEstimate g;
  double best = 0.0;
  for (std::size_t n = 1; n <= k.order(); ++n) {
    double v = std::pow(std::fabs(to_double(k.kappa(n))), 1.0 / static_cast<double>(n));
    if (v > best) {
      best = v;
      g.witness_n = n;
    }
    g.prefix_estimates.push_back(best);
  }
  g.c = best;
  return g;
}

Json to_json(const HankelReport& h) {
  Json j = Json::object();
  j["order"] = h.order;
  Json mat = Json::array();
  for (const auto& row : h.matrix) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(to_json(x));
    mat.push_back(r);
  }
  j["matrix"] = mat;
  j["psd"] = h.psd;
  Json minors = Json::array();
  for (const auto& x : h.leading_minors) minors.push_back(to_json(x));
  j["leading_minors"] = minors;
  j["failing_minor"] = h.failing_minor ? Json(*h.failing_minor) : Json(nullptr);
  j["rank"] = h.rank;
  Json piv = Json::array();
  for (const auto& x : h.pivots) piv.push_back(to_json(x));
  j["ldl_pivots"] = piv;
  if (h.witness) {
    Json w = Json::array();
    for (const auto& x : *h.witness) w.push_back(to_json(x));
    j["witness"] = w;
    j["witness_quadratic_form"] = to_json(h.witness_value);
  } else {
    j["witness"] = nullptr;
  }
  j["note"] = h.note;
  return j;
}

}  // namespace freeprob
