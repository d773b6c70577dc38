#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "monotest/grid.hpp"

namespace monotest {

enum class GameClass { AuctionHigh, AuctionLow, Contest, PublicGood, Cournot };

std::string_view to_string(GameClass cls);
/// Accepts the CLI spellings: auction-high, auction-low, contest, public-good, cournot.
GameClass parse_game_class(std::string_view name);

/// One agent's action seen together with the rest of its game.
struct ObservationContext {
  double action = 0.0;
  std::span<const double> co_actions;  ///< all actions of the game, own included
  std::optional<double> covariate;     ///< rescaled to [0, 1]

  int agents() const { return static_cast<int>(co_actions.size()); }
};

/// Per-observation contributions whose sample means are M(b, q) and W(b, q).
struct KernelValue {
  double m = 0.0;
  double w = 0.0;
};

// Window [b, b + a/q] is closed at both ends throughout.
KernelValue kernel_auction_high(const ObservationContext& ctx, const Window& window);
KernelValue kernel_auction_low(const ObservationContext& ctx, const Window& window);
KernelValue kernel_contest(const ObservationContext& ctx, const Window& window);
KernelValue kernel_public_good(const ObservationContext& ctx, const Window& window,
                               const std::function<double(double)>& benefit_derivative);
KernelValue kernel_cournot(const ObservationContext& ctx, const Window& window,
                           const std::function<double(double)>& inverse_demand,
                           const std::function<double(double)>& inverse_demand_derivative);

/// Omega(s) = gamma * s^rho with 0 < rho < 1 and gamma > 0.
struct PowerBenefit {
  double gamma = 1.0;
  double rho = 0.5;

  double derivative(double total) const;
};

/// I(s) = alpha - beta * s with alpha, beta > 0.
struct LinearDemand {
  double alpha = 1.0;
  double beta = 1.0;

  double price(double total) const { return alpha - beta * total; }
  double slope(double /*total*/) const { return -beta; }
};

/// Decomposition of a kernel into window-independent pieces:
///   m = (in_window_m * 1_w + truncation * [1(B<=hi)(hi-B) - 1(B<=lo)(lo-B)]
///        + width_coef * (hi - lo)) * 1_x
///   w = in_window_w * 1_w * 1_x
/// The sorted prefix-sum estimator works on these.
struct ObservationTerms {
  double action = 0.0;
  double in_window_m = 0.0;
  double in_window_w = 0.0;
  double truncation = 0.0;
  double width_coef = 0.0;
};

/// A game class together with its structural inputs.
class MomentKernel {
 public:
  static MomentKernel auction_high();
  static MomentKernel auction_low();
  static MomentKernel contest();
  static MomentKernel public_good(PowerBenefit benefit);
  static MomentKernel public_good(std::function<double(double)> benefit_derivative);
  static MomentKernel cournot(LinearDemand demand);
  static MomentKernel cournot(std::function<double(double)> inverse_demand,
                              std::function<double(double)> inverse_demand_derivative);
  static MomentKernel for_class(GameClass cls, PowerBenefit benefit = {}, LinearDemand demand = {});

  GameClass game_class() const { return class_; }

  /// m and w for one observation. When the window carries a covariate cell,
  /// every term is multiplied by 1(x_lo <= X <= x_hi).
  KernelValue evaluate(const ObservationContext& ctx, const Window& window) const;

  ObservationTerms terms(const ObservationContext& ctx) const;

 private:
  explicit MomentKernel(GameClass cls) : class_(cls) {}

  GameClass class_;
  std::function<double(double)> benefit_derivative_;
  std::function<double(double)> inverse_demand_;
  std::function<double(double)> inverse_demand_derivative_;
};

/// kernel_with_covariate: the base kernel restricted to a covariate cell.
KernelValue kernel_with_covariate(const MomentKernel& base, const ObservationContext& ctx, const Window& window);

}  // namespace monotest
