// Prints d * sigma^2 for the critical initialization across moment orders,
// next to the large-d expansion, plus the drift of log||x_k|| per layer.
// d * sigma^2 = 2 (ReLU) and 1 (linear) at s = 2 for every width.

#include <cstdio>
#include <vector>

#include "fracinit/fracinit.hpp"

using namespace fracinit;

int main() {
  const std::vector<double> orders{0.5, 1.0, 1.5, 2.0, 3.0};
  const std::vector<std::int64_t> widths{4, 16, 64, 256, 1024};

  for (const char* name : {"relu", "leaky", "prelu:0.2", "linear"}) {
    const auto act = Activation::parse(name);
    std::printf("\n%s  (d * sigma^2, exact / asymptotic)\n%6s", act.describe().c_str(), "d");
    for (double s : orders) std::printf("   s=%-18.1f", s);
    std::printf("\n");
    for (auto d : widths) {
      std::printf("%6lld", static_cast<long long>(d));
      for (double s : orders) {
        const double dd = static_cast<double>(d);
        const double exact = dd * kernels::critical_sigma(MomentQuery{d, s, act}).sigma_sq;
        try {
          std::printf("   %8.5f / %8.5f", exact, dd * kernels::asymptotic_sigma_sq(s, d, act.slope(), 1.0));
        } catch (const Error&) {
          std::printf("   %8.5f / %8s", exact, "-");  // no expansion for this slope, or s > 2
        }
      }
      std::printf("\n");
    }
  }

  std::printf("\nper-layer drift of log||x_k|| at the critical sigma (d = 64)\n");
  std::printf("%12s %8s %12s %12s\n", "activation", "s", "mu", "s2");
  for (const char* name : {"relu", "prelu:0.2", "linear"}) {
    const auto act = Activation::parse(name);
    for (double s : orders) {
      const double sig = kernels::critical_sigma(MomentQuery{64, s, act}).sigma;
      const auto st = act.is_relu() ? lyapunov::relu_log_stats(sig, 64) : lyapunov::prelu_log_stats(sig, 64, act.slope());
      std::printf("%12s %8.1f %12.3e %12.3e\n", name, s, st.mu, st.s2);
    }
  }

  std::printf("\ndropout (relu, d = 64): d * sigma^2 by keep probability\n");
  for (double q : {1.0, 0.9, 0.8, 0.5}) {
    std::printf("  q=%.1f:", q);
    for (double s : orders) {
      std::printf("  %8.5f", 64.0 * kernels::critical_sigma(MomentQuery{64, s, Activation::relu(), q}).sigma_sq);
    }
    std::printf("\n");
  }
  return 0;
}
