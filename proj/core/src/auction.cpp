#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>

#include "vpme/error.hpp"
#include "vpme/ot_solvers.hpp"

namespace vpme {

// Bidders bid over a short list of their cheapest objects; after each phase a
// full scan restores epsilon-complementary slackness against every object by
// adding violating objects to the lists and re-queueing those bidders.
AuctionResult auction_transport(const PairCost& cost, const AuctionOptions& opts) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  if (m == 0 || n == 0) throw InvalidArgument("auction: empty cloud");
  if (m % n != 0) throw InvalidArgument("auction: object count must divide bidder count");
  if (!(opts.scaling > 1.0)) throw InvalidArgument("auction: scaling factor must exceed 1");
  const std::size_t k = m / n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  std::vector<double> price(m, 0.0);  // slot s of object j is j * k + s
  std::vector<std::size_t> owner(m, none);
  std::vector<std::size_t> slot_of(m, none);
  std::vector<std::size_t> min_slot(n);
  std::vector<double> min_price(n, 0.0);
  std::vector<double> second_price(n, k > 1 ? 0.0 : inf);
  for (std::size_t j = 0; j < n; ++j) min_slot[j] = j * k;

  auto refresh = [&](std::size_t j) {
    std::size_t best = j * k;
    double p1 = price[best];
    double p2 = inf;
    for (std::size_t s = j * k + 1; s < (j + 1) * k; ++s) {
      if (price[s] < p1) {
        p2 = p1;
        p1 = price[s];
        best = s;
      } else if (price[s] < p2) {
        p2 = price[s];
      }
    }
    min_slot[j] = best;
    min_price[j] = p1;
    second_price[j] = p2;
  };

  // Candidate lists: the cheapest objects of every bidder.
  const std::size_t width = std::min<std::size_t>(n, 32);
  const std::size_t rebuild_width = std::min<std::size_t>(n, 64);
  std::vector<std::vector<std::uint32_t>> cand(m);
  std::vector<double> thr(m, 0.0);  // every object outside cand[i] costs at least thr[i]
  std::vector<double> lb(m, 0.0);   // and is valued at least lb[i] at current prices
  std::vector<double> buf(n);
  std::vector<double> bidbuf(n);
  std::vector<std::uint32_t> order(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cost.row(i, buf.data());
    std::iota(order.begin(), order.end(), 0U);
    std::nth_element(order.begin(), order.begin() + static_cast<long>(width - 1), order.end(),
                     [&](std::uint32_t x, std::uint32_t y) { return buf[x] < buf[y]; });
    cand[i].assign(order.begin(), order.begin() + static_cast<long>(width));
    double mn = inf;
    for (auto j : cand[i]) {
      mn = std::min(mn, buf[j]);
      thr[i] = std::max(thr[i], buf[j]);
    }
    lb[i] = thr[i];
    scale += mn / static_cast<double>(m);
  }

  AuctionResult res;
  res.object_of.assign(m, none);
  double eps = std::max(scale, opts.absolute_tolerance);
  std::deque<std::size_t> queue;
  // Lower bound on every slot price; prices only rise, so a stale value stays valid.
  double pmin = 0.0;
  std::size_t since_pmin = 0;

  auto bid = [&](std::size_t i) {
    if (++since_pmin >= n) {
      pmin = *std::min_element(min_price.begin(), min_price.end());
      since_pmin = 0;
    }
    double best = inf;
    double second = inf;
    std::size_t bj = 0;
    double bc = 0.0;
    for (const auto j : cand[i]) {
      const double c = cost(i, j);
      const double val = c + min_price[j];
      if (val < second) {
        if (val < best) {
          second = best;
          best = val;
          bj = j;
          bc = c;
        } else {
          second = val;
        }
      }
    }
    second = std::min(second, bc + second_price[bj]);
    if (best > std::max(lb[i], thr[i] + pmin)) {
      // An object outside the list may be cheaper: rebuild the list from the
      // full row at current prices. An overestimated runner-up is left to the
      // slackness check below.
      cost.row(i, bidbuf.data());
      for (std::size_t j = 0; j < n; ++j) bidbuf[j] += min_price[j];
      std::iota(order.begin(), order.end(), 0U);
      std::nth_element(order.begin(), order.begin() + static_cast<long>(rebuild_width - 1), order.end(),
                       [&](std::uint32_t x, std::uint32_t y) { return bidbuf[x] < bidbuf[y]; });
      cand[i].assign(order.begin(), order.begin() + static_cast<long>(rebuild_width));
      lb[i] = bidbuf[order[rebuild_width - 1]];
      best = inf;
      second = inf;
      for (const auto j : cand[i]) {
        const double val = bidbuf[j];
        if (val < second) {
          if (val < best) {
            second = best;
            best = val;
            bj = j;
          } else {
            second = val;
          }
        }
      }
      bc = best - min_price[bj];
      second = std::min(second, bc + second_price[bj]);
    }
    const double increment = (second < inf ? second - best : 0.0) + eps;
    const std::size_t s = min_slot[bj];
    price[s] += increment;
    const std::size_t displaced = owner[s];
    owner[s] = i;
    slot_of[i] = s;
    res.object_of[i] = bj;
    if (displaced != none) {
      res.object_of[displaced] = none;
      slot_of[displaced] = none;
      queue.push_back(displaced);
    }
    refresh(bj);
    if (++res.bids > opts.max_bids) throw SolverFailure("auction: bid cap exceeded", eps, res.phases);
  };

  while (true) {
    ++res.phases;
    std::fill(owner.begin(), owner.end(), none);
    std::fill(slot_of.begin(), slot_of.end(), none);
    std::fill(res.object_of.begin(), res.object_of.end(), none);
    queue.clear();
    for (std::size_t i = 0; i < m; ++i) queue.push_back(i);

    while (true) {
      while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        bid(i);
      }
      // Full check of epsilon-complementary slackness.
      for (std::size_t i = 0; i < m; ++i) {
        cost.row(i, buf.data());
        const std::size_t own = res.object_of[i];
        const double held = buf[own] + price[slot_of[i]];
        double best = inf;
        std::size_t bj = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const double alt = (j == own && min_slot[j] == slot_of[i]) ? second_price[j] : min_price[j];
          const double val = buf[j] + alt;
          if (val < best) {
            best = val;
            bj = j;
          }
        }
        // The bidder's own object offers its held slot or the next cheapest one.
        best = std::min(best, held);
        if (held > best + eps * (1.0 + 1e-9)) {
          if (std::find(cand[i].begin(), cand[i].end(), bj) == cand[i].end())
            cand[i].push_back(static_cast<std::uint32_t>(bj));
          owner[slot_of[i]] = none;
          slot_of[i] = none;
          res.object_of[i] = none;
          queue.push_back(i);
        }
      }
      if (queue.empty()) break;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += cost(i, res.object_of[i]);
    res.mean_cost = total / static_cast<double>(m);
    res.error_bound = eps;
    const double target = std::max(opts.absolute_tolerance, opts.relative_tolerance * res.mean_cost);
    if (eps <= target) break;
    eps = std::max(eps / opts.scaling, target);
  }
  return res;
}

}  // namespace vpme
