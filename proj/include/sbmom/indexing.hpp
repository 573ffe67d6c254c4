#ifndef SBMOM_INDEXING_HPP
#define SBMOM_INDEXING_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Combinatorial index structures labelling the summands of the exact
// moment expansion for the one-dimensional super-Brownian motion.
//
// A summand of E[u_t(x)^n] is labelled by a triple (alpha, beta, tau):
//   alpha in {0,1}^n      marks which of the n top-level kernels attach
//                         to a branch time instead of the initial datum,
//   beta  in {0,1}^{n'}   marks which branch variables re-attach deeper
//                         (beta_{n'} = 0 always),
//   tau : {1..2n'} -> {1..n'}  pairs kernel endpoints with branch
//                         variables, hitting every value exactly twice.
//
// Internally everything is 0-based; the JSON layer converts tau back to
// the conventional 1-based values.

namespace sbmom {

using BitVec = std::vector<std::uint8_t>;

inline int weight(const BitVec& bits) {
    int w = 0;
    for (auto b : bits) w += (b != 0);
    return w;
}

// Positions (0-based) of the set bits, in increasing order. This is the
// map iota: the i-th entry is the index of the i-th nonzero coordinate.
inline std::vector<int> iota_map(const BitVec& bits) {
    std::vector<int> pos;
    for (int i = 0; i < static_cast<int>(bits.size()); ++i)
        if (bits[i]) pos.push_back(i);
    return pos;
}

struct MomentIndexPair {
    int n = 0;        // moment order
    int n_prime = 0;  // number of branch variables, 0 <= n' <= n-1
    BitVec alpha;     // length n
    BitVec beta;      // length n', empty when n' = 0

    bool valid() const {
        if (n < 1 || n_prime < 0 || n_prime > n - 1) return false;
        if (static_cast<int>(alpha.size()) != n) return false;
        if (static_cast<int>(beta.size()) != n_prime) return false;
        if (n_prime == 0) return weight(alpha) == 0;
        if (beta.back() != 0) return false;
        return weight(alpha) + weight(beta) == 2 * n_prime;
    }
};

// The pairing tau, stored as 0-based variable indices; empty when n'=0.
struct PairingMap {
    std::vector<int> tau;
};

struct IndexTriple {
    MomentIndexPair pair;
    PairingMap pairing;
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

// |J_{n,n'}| = n!(n-1)! / (2^{n'} (n-n')! (n-n'-1)!), evaluated as the
// exact integer product of (n-k)(n-1-k)/2 over k = 0..n'-1. Overflow of
// 64-bit intermediate values throws std::overflow_error.
inline std::int64_t triple_count_closed_form(int n, int n_prime) {
    detail::require(n >= 1, "triple_count: n must be positive");
    detail::require(n_prime >= 0 && n_prime <= n - 1,
                    "triple_count: need 0 <= n' <= n-1");
    std::int64_t count = 1;
    for (int k = 0; k < n_prime; ++k) {
        // (n-k)(n-1-k) is a product of consecutive integers, hence even.
        std::int64_t f = static_cast<std::int64_t>(n - k) * (n - 1 - k) / 2;
        if (__builtin_mul_overflow(count, f, &count))
            throw std::overflow_error("triple_count: exceeds 64-bit range");
    }
    return count;
}

// All index pairs [alpha, beta] for given (n, n'), in lexicographic order
// of the concatenated word alpha beta (first coordinate most significant).
inline std::vector<MomentIndexPair> enumerate_index_pairs(int n, int n_prime) {
    detail::require(n >= 1 && n <= 62, "enumerate_index_pairs: n out of range");
    detail::require(n_prime >= 0 && n_prime <= n - 1,
                    "enumerate_index_pairs: need 0 <= n' <= n-1");
    std::vector<MomentIndexPair> out;
    if (n_prime == 0) {
        out.push_back({n, 0, BitVec(n, 0), BitVec{}});
        return out;
    }
    const int target = 2 * n_prime;
    for (std::uint64_t a = 0; a < (1ULL << n); ++a) {
        BitVec alpha(n);
        int wa = 0;
        for (int i = 0; i < n; ++i) {
            alpha[i] = static_cast<std::uint8_t>((a >> (n - 1 - i)) & 1U);
            wa += alpha[i];
        }
        int wb = target - wa;
        if (wb < 0 || wb > n_prime - 1) continue;  // beta ends in 0
        for (std::uint64_t b = 0; b < (1ULL << n_prime); ++b) {
            if (b & 1U) continue;  // last coordinate of beta must be 0
            BitVec beta(n_prime);
            int w = 0;
            for (int i = 0; i < n_prime; ++i) {
                beta[i] = static_cast<std::uint8_t>((b >> (n_prime - 1 - i)) & 1U);
                w += beta[i];
            }
            if (w != wb) continue;
            out.push_back({n, n_prime, alpha, beta});
        }
    }
    return out;
}

namespace detail {

// Recursive slot assignment: value k (0-based) claims two of the free
// slots. Slots i >= |alpha| belong to the deeper-attachment region and
// require tau(i) > iota_beta(i - |alpha|); that constraint is checked as
// soon as a slot is claimed, pruning dead branches early.
inline void assign_pairing(int k, int n_prime, int alpha_weight,
                           const std::vector<int>& iota_beta,
                           std::vector<int>& tau, std::vector<int>& free_slots,
                           std::vector<PairingMap>& out) {
    if (k == n_prime) {
        out.push_back({tau});
        return;
    }
    const int m = static_cast<int>(free_slots.size());
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            const int ia = free_slots[a], ib = free_slots[b];
            if (ia >= alpha_weight && k <= iota_beta[ia - alpha_weight]) continue;
            if (ib >= alpha_weight && k <= iota_beta[ib - alpha_weight]) continue;
            tau[ia] = k;
            tau[ib] = k;
            std::vector<int> rest;
            rest.reserve(m - 2);
            for (int c = 0; c < m; ++c)
                if (c != a && c != b) rest.push_back(free_slots[c]);
            assign_pairing(k + 1, n_prime, alpha_weight, iota_beta, tau, rest, out);
            tau[ia] = -1;
            tau[ib] = -1;
        }
    }
}

} // namespace detail

// All pairings tau compatible with an index pair, sorted lexicographically
// as words. For n' = 0 the single empty pairing is returned.
inline std::vector<PairingMap> enumerate_pairings(const MomentIndexPair& pair) {
    detail::require(pair.valid(), "enumerate_pairings: invalid index pair");
    if (pair.n_prime == 0) return {PairingMap{}};
    const int slots = 2 * pair.n_prime;
    std::vector<int> tau(slots, -1);
    std::vector<int> free_slots(slots);
    for (int i = 0; i < slots; ++i) free_slots[i] = i;
    std::vector<PairingMap> out;
    detail::assign_pairing(0, pair.n_prime, weight(pair.alpha), iota_map(pair.beta),
                           tau, free_slots, out);
    std::sort(out.begin(), out.end(),
              [](const PairingMap& x, const PairingMap& y) { return x.tau < y.tau; });
    return out;
}

// Full triple list for (n, n'): pairs in lexicographic order, pairings
// lexicographic within each pair. Deterministic.
inline std::vector<IndexTriple> enumerate_triples(int n, int n_prime) {
    std::vector<IndexTriple> out;
    for (const auto& pair : enumerate_index_pairs(n, n_prime))
        for (auto& tau : enumerate_pairings(pair)) out.push_back({pair, std::move(tau)});
    return out;
}

// Triples for all n' = 0..n-1 concatenated; the order (and hence the
// per-triple RNG stream index used by the moment engine) is fixed.
inline std::vector<IndexTriple> enumerate_all_triples(int n) {
    std::vector<IndexTriple> out;
    for (int np = 0; np < n; ++np)
        for (auto& t : enumerate_triples(n, np)) out.push_back(std::move(t));
    return out;
}

} // namespace sbmom

#endif
