#include "monotest/games.hpp"

#include <cmath>
#include <numeric>

#include "monotest/error.hpp"

namespace monotest {

std::string_view to_string(GameClass cls) {
  switch (cls) {
    case GameClass::AuctionHigh: return "auction-high";
    case GameClass::AuctionLow: return "auction-low";
    case GameClass::Contest: return "contest";
    case GameClass::PublicGood: return "public-good";
    case GameClass::Cournot: return "cournot";
  }
  return "unknown";
}

GameClass parse_game_class(std::string_view name) {
  if (name == "auction-high" || name == "auction") return GameClass::AuctionHigh;
  if (name == "auction-low" || name == "procurement") return GameClass::AuctionLow;
  if (name == "contest") return GameClass::Contest;
  if (name == "public-good") return GameClass::PublicGood;
  if (name == "cournot") return GameClass::Cournot;
  throw UsageError("unknown game class '" + std::string(name) + "'");
}

namespace {

double indicator(bool c) { return c ? 1.0 : 0.0; }

void require_agents(const ObservationContext& ctx) {
  if (ctx.agents() < 2) throw UsageError("invalid game: need at least two agents");
}

double game_total(const ObservationContext& ctx) {
  return std::accumulate(ctx.co_actions.begin(), ctx.co_actions.end(), 0.0);
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("model parameter error: ") + what + " is not finite");
  return v;
}

}  // namespace

KernelValue kernel_auction_high(const ObservationContext& ctx, const Window& window) {
  require_agents(ctx);
  const double b = ctx.action;
  const double in = indicator(window.contains(b));
  const double upper = indicator(b <= window.hi) * (window.hi - b);
  const double lower = indicator(b <= window.lo) * (window.lo - b);
  return {b * in + (upper - lower) / (ctx.agents() - 1), in};
}

KernelValue kernel_auction_low(const ObservationContext& ctx, const Window& window) {
  KernelValue v = kernel_auction_high(ctx, window);
  v.m -= (window.hi - window.lo) / (ctx.agents() - 1);
  return v;
}

KernelValue kernel_contest(const ObservationContext& ctx, const Window& window) {
  require_agents(ctx);
  const double total = game_total(ctx);
  if (!(total > 0.0)) throw NumericError("invalid game: total effort must be positive");
  if (!window.contains(ctx.action)) return {};
  const double share = ctx.action / total;
  return {ctx.action, share * (1.0 - share)};
}

KernelValue kernel_public_good(const ObservationContext& ctx, const Window& window,
                               const std::function<double(double)>& benefit_derivative) {
  require_agents(ctx);
  if (!window.contains(ctx.action)) return {};
  return {1.0, checked(benefit_derivative(game_total(ctx)), "benefit derivative")};
}

KernelValue kernel_cournot(const ObservationContext& ctx, const Window& window,
                           const std::function<double(double)>& inverse_demand,
                           const std::function<double(double)>& inverse_demand_derivative) {
  require_agents(ctx);
  if (!window.contains(ctx.action)) return {};
  const double total = game_total(ctx);
  const double price = checked(inverse_demand(total), "inverse demand");
  const double slope = checked(inverse_demand_derivative(total), "inverse demand derivative");
  return {1.0, price + slope * ctx.action};
}

double PowerBenefit::derivative(double total) const {
  return gamma * rho * std::pow(total, rho - 1.0);
}

MomentKernel MomentKernel::auction_high() { return MomentKernel(GameClass::AuctionHigh); }
MomentKernel MomentKernel::auction_low() { return MomentKernel(GameClass::AuctionLow); }
MomentKernel MomentKernel::contest() { return MomentKernel(GameClass::Contest); }

MomentKernel MomentKernel::public_good(PowerBenefit benefit) {
  if (!(benefit.gamma > 0.0) || !(benefit.rho > 0.0 && benefit.rho < 1.0)) {
    throw UsageError("public-good benefit needs gamma > 0 and 0 < rho < 1");
  }
  return public_good([benefit](double s) { return benefit.derivative(s); });
}

MomentKernel MomentKernel::public_good(std::function<double(double)> benefit_derivative) {
  MomentKernel k(GameClass::PublicGood);
  k.benefit_derivative_ = std::move(benefit_derivative);
  return k;
}

MomentKernel MomentKernel::cournot(LinearDemand demand) {
  if (!(demand.alpha > 0.0) || !(demand.beta > 0.0)) {
    throw UsageError("linear inverse demand needs alpha > 0 and beta > 0");
  }
  return cournot([demand](double s) { return demand.price(s); }, [demand](double s) { return demand.slope(s); });
}

MomentKernel MomentKernel::cournot(std::function<double(double)> inverse_demand,
                                   std::function<double(double)> inverse_demand_derivative) {
  MomentKernel k(GameClass::Cournot);
  k.inverse_demand_ = std::move(inverse_demand);
  k.inverse_demand_derivative_ = std::move(inverse_demand_derivative);
  return k;
}

MomentKernel MomentKernel::for_class(GameClass cls, PowerBenefit benefit, LinearDemand demand) {
  switch (cls) {
    case GameClass::AuctionHigh: return auction_high();
    case GameClass::AuctionLow: return auction_low();
    case GameClass::Contest: return contest();
    case GameClass::PublicGood: return public_good(benefit);
    case GameClass::Cournot: return cournot(demand);
  }
  throw UsageError("unknown game class");
}

KernelValue MomentKernel::evaluate(const ObservationContext& ctx, const Window& window) const {
  KernelValue v;
  switch (class_) {
    case GameClass::AuctionHigh: v = kernel_auction_high(ctx, window); break;
    case GameClass::AuctionLow: v = kernel_auction_low(ctx, window); break;
    case GameClass::Contest: v = kernel_contest(ctx, window); break;
    case GameClass::PublicGood: v = kernel_public_good(ctx, window, benefit_derivative_); break;
    case GameClass::Cournot:
      v = kernel_cournot(ctx, window, inverse_demand_, inverse_demand_derivative_);
      break;
  }
  if (window.has_covariate()) {
    if (!ctx.covariate) throw UsageError("covariate window needs an observation covariate");
    if (!window.contains_covariate(*ctx.covariate)) return {};
  }
  return v;
}

ObservationTerms MomentKernel::terms(const ObservationContext& ctx) const {
  require_agents(ctx);
  ObservationTerms t;
  t.action = ctx.action;
  const double inv = 1.0 / (ctx.agents() - 1);
  switch (class_) {
    case GameClass::AuctionHigh:
    case GameClass::AuctionLow:
      t.in_window_m = ctx.action;
      t.in_window_w = 1.0;
      t.truncation = inv;
      t.width_coef = class_ == GameClass::AuctionLow ? -inv : 0.0;
      break;
    case GameClass::Contest: {
      const double total = game_total(ctx);
      if (!(total > 0.0)) throw NumericError("invalid game: total effort must be positive");
      const double share = ctx.action / total;
      t.in_window_m = ctx.action;
      t.in_window_w = share * (1.0 - share);
      break;
    }
    case GameClass::PublicGood:
      t.in_window_m = 1.0;
      t.in_window_w = checked(benefit_derivative_(game_total(ctx)), "benefit derivative");
      break;
    case GameClass::Cournot: {
      const double total = game_total(ctx);
      t.in_window_m = 1.0;
      t.in_window_w = checked(inverse_demand_(total), "inverse demand") +
                      checked(inverse_demand_derivative_(total), "inverse demand derivative") * ctx.action;
      break;
    }
  }
  return t;
}

KernelValue kernel_with_covariate(const MomentKernel& base, const ObservationContext& ctx, const Window& window) {
  if (!ctx.covariate) throw UsageError("kernel_with_covariate: observation has no covariate");
  if (!window.has_covariate()) throw UsageError("kernel_with_covariate: window has no covariate cell");
  return base.evaluate(ctx, window);
}

}  // namespace monotest
