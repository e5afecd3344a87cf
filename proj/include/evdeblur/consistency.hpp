#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evdeblur/core.hpp"
#include "evdeblur/edi.hpp"

namespace evd {

// Callable contract unifying any deblur engine for loss evaluation:
// (target interval; blurry frame; events) -> latent image at the frame's
// resolution. A degenerate target [t,t] requests the sharp latent at t;
// target == exposure must return the input image.
using DeblurOperator =
    std::function<Image(const TimeInterval& target, const BlurryFrame& blur,
                        const EventStream& stream)>;

// EDI engine behind the operator contract. Non-degenerate targets are
// anchored at the target midpoint; handles frame/event resolution ratios
// R >= 1 via the upsampled integral map.
DeblurOperator make_edi_operator(const EdiConfig& cfg);

struct LossWeights {
  double bc = 50.0;
  double sc = 1.0;
  double tg = 0.0;
  double sg = 0.0;
};

// One self-supervision sample: a blurry frame, a more blurred companion
// covering it, the events over the larger exposure, and an anchor time.
struct TrainingPair {
  BlurryFrame b_t;      // exposure T
  BlurryFrame b_tilde;  // exposure T~ containing T
  EventStream stream;   // spans at least T~
  double t = 0.0;       // anchor inside T
};

inline constexpr double kRatioFloor = 1e-6;

// op(target; blur, stream) / max(blur, ratio_floor), elementwise.
Image ratio_of(const DeblurOperator& op, const TimeInterval& target,
               const BlurryFrame& blur, const EventStream& stream);

// Brightness consistency: mean |b_t - op(T; b_tilde, events over T~)|.
double loss_bc(const DeblurOperator& op, const TrainingPair& pair);

// Structure consistency: compares the blur2blur ratio against the quotient
// of the two blur2sharp ratios at the anchor, the quotient clamped to
// [0, 1/ratio_floor].
double loss_sc(const DeblurOperator& op, const TrainingPair& pair);

// Temporal self-distillation: teacher restores the sharp latent from the
// less blurred frame, student from the more blurred one.
double loss_tg(const DeblurOperator& teacher, const DeblurOperator& student,
               const TrainingPair& pair);

// Spatial self-distillation: the teacher output is box-downsampled while the
// student deblurs the downsampled frame against the original events, i.e. at
// a smaller frame/event resolution ratio.
double loss_sg(const DeblurOperator& teacher, const DeblurOperator& student,
               const TrainingPair& pair, int factor);

struct LossBreakdown {
  double bc = 0.0;
  double sc = 0.0;
  double tg = 0.0;
  double sg = 0.0;
  double total = 0.0;
};

// Weighted sum beta_bc*L_bc + beta_sc*L_sc + beta_tg*L_tg + beta_sg*L_sg,
// each component averaged over the batch in order. Teacher losses are
// evaluated only when their weight is nonzero.
LossBreakdown total_loss(const DeblurOperator& op, const DeblurOperator& teacher,
                         const std::vector<TrainingPair>& batch,
                         const LossWeights& weights, int sg_factor = 1);

// The temporal and spatial scale sets a trained operator is expected to
// cover: exposures {m * T_k | 1 <= m <= M} and the continuous ratio range
// [1, r_bar].
struct ScaleSets {
  std::vector<double> exposures;  // sorted, duplicates removed
  double r_min = 1.0;
  double r_max = 1.0;
};

ScaleSets scale_sets(const std::vector<double>& base_exposures, int m, double r_bar);

struct LossRow {
  std::string id;
  LossBreakdown losses;
};

// key=value lines, one block per row.
std::string format_loss_report(const std::vector<LossRow>& rows);
// "pair,L_BC,L_SC,L_TG,L_SG,total" table.
std::string format_loss_csv(const std::vector<LossRow>& rows);

}  // namespace evd
