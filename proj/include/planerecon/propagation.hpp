#pragma once

#include <cmath>
#include <iostream>
#include <vector>

#include "planerecon/register2d.hpp"

namespace planerecon {

struct PropagationParams {
  int manual_stride{10};     // cycles between manual segmentations
  double weight_gamma{6.0};  // steepness of the arctan fusion schedule
  double sdf_ramp_px{8.0};
  Register2DParams reg;
};

/// Forward-branch weight at index k inside the manual interval [a, b];
/// 0.5 at the midpoint, approaching 1 near a and 0 near b.
inline double fusion_alpha(double k, double a, double b, double gamma) {
  double n = b - a;
  double mid = 0.5 * (a + b);
  return 0.5 - std::atan(gamma * (k - mid) / n) / M_PI;
}

/// Manual segmentation cycles for a series: every `stride` cycles plus the
/// final cycle, so every interval has two manual endpoints.
inline std::vector<int> manual_cycle_indices(int n_cycles, int stride) {
  if (stride < 1) throw ConfigError("manual stride must be >= 1");
  std::vector<int> out;
  for (int k = 0; k < n_cycles; k += stride) out.push_back(k);
  if (out.back() != n_cycles - 1) out.push_back(n_cycles - 1);
  return out;
}

/// Pairwise SVF registrations between consecutive slices of one plane:
/// element j-a-1 maps slice j's frame onto slice j-1's (forward map), and
/// its inverse runs the opposite way, so one chain serves both directions.
inline std::vector<Svf2D> chain_registrations(const std::vector<Image2D>& images, int a, int b,
                                              const Register2DParams& params) {
  if (a < 0 || b >= int(images.size()) || a >= b)
    throw ConfigError("chain_registrations: invalid interval");
  std::vector<Svf2D> chain;
  chain.reserve(b - a);
  for (int j = a + 1; j <= b; ++j) chain.push_back(register_svf(images[j], images[j - 1], params));
  return chain;
}

/// Composition of pairwise forward maps from slice `from` to slice `to`
/// within one manual interval; composition by field resampling.
inline Diffeo2D propagate_forward(const std::vector<Image2D>& images, int from, int to,
                                  const Register2DParams& params = {}) {
  auto chain = chain_registrations(images, from, to, params);
  const Image2D& ref = images[from];
  Field2D fwd = zero_field(ref.nu, ref.nv, ref.su, ref.sv);
  Field2D inv = fwd;
  bool ok = true;
  for (size_t c = 0; c < chain.size(); ++c) {
    fwd = compose(fwd, chain[c].forward_px());
    inv = compose(chain[c].inverse_px(), inv);
    ok = ok && chain[c].converged;
  }
  Diffeo2D out;
  out.converged = ok;
  out.forward_mm = fwd;
  out.inverse_mm = inv;
  for (auto& v : out.forward_mm.data) v = Vec2d{v.x * ref.su, v.y * ref.sv};
  for (auto& v : out.inverse_mm.data) v = Vec2d{v.x * ref.su, v.y * ref.sv};
  return out;
}

/// Fused propagation output for the interior of one manual interval.
struct PropagatedInterval {
  int a{0}, b{0};
  std::vector<Mask2D> fused;          // index k-a-1, k in (a,b)
  std::vector<Mask2D> forward_only;   // single-branch masks, for diagnostics
  std::vector<Mask2D> backward_only;
  std::vector<double> alpha;          // fusion weight per interior index
  bool all_converged{true};
  size_t dropped_pixels{0};           // stray components removed after fusion
};

/// Propagates the manual mask at cycle a through the interval (a, b) by
/// fusing the forward Eulerian chain with the backward chain carried through
/// the geometric map between the two manual masks. Both branches warp the
/// signed distances of the manual mask at a; the blend is thresholded at 0.
inline PropagatedInterval propagate_interval(const std::vector<Image2D>& images, int a, int b,
                                             const Mask2D& manual_a, const Mask2D& manual_b,
                                             const PropagationParams& params = {}) {
  PropagatedInterval out;
  out.a = a;
  out.b = b;
  if (b - a < 2) return out;  // no interior slices

  auto chain = chain_registrations(images, a, b, params.reg);
  for (const auto& c : chain) out.all_converged = out.all_converged && c.converged;

  // geometric shift between the manual endpoint masks: maps b-frame coords
  // into a-frame coords so the backward branch can carry the a mask
  Svf2D geo = register_masks_geometric(manual_b, manual_a, params.reg, params.sdf_ramp_px);
  out.all_converged = out.all_converged && geo.converged;
  Field2D shift = geo.forward_px();

  Sdf2D sdf_a = mask_to_sdf(manual_a);

  // forward pull-backs, frame k -> frame a, built incrementally
  std::vector<Field2D> fwd(b - a - 1, Field2D{});
  Field2D t = zero_field(manual_a.nu, manual_a.nv, manual_a.su, manual_a.sv);
  for (int k = a + 1; k < b; ++k) {
    t = compose(t, chain[k - a - 1].forward_px());
    fwd[k - a - 1] = t;
  }
  // backward pull-backs, frame k -> frame b
  std::vector<Field2D> bwd(b - a - 1, Field2D{});
  Field2D u = zero_field(manual_a.nu, manual_a.nv, manual_a.su, manual_a.sv);
  for (int k = b - 1; k > a; --k) {
    u = compose(u, chain[k - a].inverse_px());
    bwd[k - a - 1] = u;
  }

  for (int k = a + 1; k < b; ++k) {
    int idx = k - a - 1;
    double alpha = fusion_alpha(k, a, b, params.weight_gamma);
    out.alpha.push_back(alpha);

    Sdf2D warped_f = warp_image(sdf_a, fwd[idx]);
    Field2D back_map = compose(shift, bwd[idx]);
    Sdf2D warped_b = warp_image(sdf_a, back_map);

    Sdf2D blended = warped_f;
    for (size_t p = 0; p < blended.size(); ++p)
      blended.data[p] = float(alpha * warped_f.data[p] + (1.0 - alpha) * warped_b.data[p]);

    Mask2D fused = sdf_to_mask(blended);
    out.dropped_pixels += keep_largest_component(fused);
    if (count_foreground(fused) == 0)
      throw PropagationCollapseError("propagate_interval: fused mask is empty at cycle " +
                                     std::to_string(k));
    out.fused.push_back(std::move(fused));
    out.forward_only.push_back(sdf_to_mask(warped_f));
    out.backward_only.push_back(sdf_to_mask(warped_b));
  }
  return out;
}

/// Whole-plane propagation: manual masks are emitted unchanged at their
/// cycles, interval interiors come from the fused propagation.
struct PlanePropagation {
  std::vector<Mask2D> masks;          // per cycle
  std::vector<std::uint8_t> is_manual;
  bool all_converged{true};
};

inline PlanePropagation propagate_plane(const std::vector<Image2D>& images,
                                        const std::vector<int>& manual_cycles,
                                        const std::vector<Mask2D>& manual_masks,
                                        const PropagationParams& params = {}) {
  if (manual_cycles.size() != manual_masks.size() || manual_cycles.size() < 1)
    throw ConfigError("propagate_plane: manual cycles and masks must align");
  int n_cycles = int(images.size());
  PlanePropagation out;
  out.masks.resize(n_cycles);
  out.is_manual.assign(n_cycles, 0);
  for (size_t m = 0; m < manual_cycles.size(); ++m) {
    out.masks[manual_cycles[m]] = manual_masks[m];
    out.is_manual[manual_cycles[m]] = 1;
  }
  for (size_t m = 0; m + 1 < manual_cycles.size(); ++m) {
    int a = manual_cycles[m], b = manual_cycles[m + 1];
    auto interval = propagate_interval(images, a, b, manual_masks[m], manual_masks[m + 1], params);
    out.all_converged = out.all_converged && interval.all_converged;
    for (int k = a + 1; k < b; ++k) out.masks[k] = interval.fused[k - a - 1];
  }
  return out;
}

}  // namespace planerecon
