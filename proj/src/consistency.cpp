#include "evdeblur/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evdeblur/simulator.hpp"

namespace evd {

DeblurOperator make_edi_operator(const EdiConfig& cfg) {
  return [cfg](const TimeInterval& target, const BlurryFrame& blur,
               const EventStream& stream) -> Image {
    if (target.degenerate()) {
      return deblur_multiscale(blur, stream, target.start, cfg);
    }
    return blur2blur(blur, stream, target.midpoint(), target, cfg).image;
  };
}

namespace {

void check_pair(const TrainingPair& pair) {
  if (!pair.b_tilde.exposure.contains(pair.b_t.exposure)) {
    throw Error(Errc::target_not_nested, "pair exposure T not inside T~");
  }
  if (!pair.stream.span.contains(pair.b_tilde.exposure)) {
    throw Error(Errc::interval_out_of_span, "pair stream does not cover T~");
  }
  if (!pair.b_t.exposure.contains(pair.t)) {
    throw Error(Errc::anchor_out_of_exposure, "pair anchor outside T");
  }
}

Image divide_guarded(const Image& num, const Image& den) {
  if (!num.same_shape(den)) throw Error(Errc::size_mismatch, "ratio shapes differ");
  Image out(num.width, num.height, num.channels);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double q = num.data[i] / std::max(den.data[i], kRatioFloor);
    out.data[i] = std::clamp(q, 0.0, 1.0 / kRatioFloor);
  }
  return out;
}

}  // namespace

Image ratio_of(const DeblurOperator& op, const TimeInterval& target,
               const BlurryFrame& blur, const EventStream& stream) {
  Image restored = op(target, blur, stream);
  if (!restored.same_shape(blur.image)) {
    throw Error(Errc::size_mismatch, "operator output shape differs from blur");
  }
  Image out(restored.width, restored.height, restored.channels);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = restored.data[i] / std::max(blur.image.data[i], kRatioFloor);
  }
  return out;
}

double loss_bc(const DeblurOperator& op, const TrainingPair& pair) {
  check_pair(pair);
  const EventStream ev = slice(pair.stream, pair.b_tilde.exposure);
  const Image restored = op(pair.b_t.exposure, pair.b_tilde, ev);
  return mean_abs_diff(pair.b_t.image, restored);
}

double loss_sc(const DeblurOperator& op, const TrainingPair& pair) {
  check_pair(pair);
  const EventStream ev_tilde = slice(pair.stream, pair.b_tilde.exposure);
  const EventStream ev_t = slice(pair.stream, pair.b_t.exposure);
  const TimeInterval instant{pair.t, pair.t};

  const Image blur2blur_ratio = ratio_of(op, pair.b_t.exposure, pair.b_tilde, ev_tilde);
  const Image sharp_from_tilde = ratio_of(op, instant, pair.b_tilde, ev_tilde);
  const Image sharp_from_t = ratio_of(op, instant, pair.b_t, ev_t);
  const Image quotient = divide_guarded(sharp_from_tilde, sharp_from_t);
  return mean_abs_diff(blur2blur_ratio, quotient);
}

double loss_tg(const DeblurOperator& teacher, const DeblurOperator& student,
               const TrainingPair& pair) {
  check_pair(pair);
  const TimeInterval instant{pair.t, pair.t};
  const Image from_teacher =
      teacher(instant, pair.b_t, slice(pair.stream, pair.b_t.exposure));
  const Image from_student =
      student(instant, pair.b_tilde, slice(pair.stream, pair.b_tilde.exposure));
  return mean_abs_diff(from_teacher, from_student);
}

double loss_sg(const DeblurOperator& teacher, const DeblurOperator& student,
               const TrainingPair& pair, int factor) {
  check_pair(pair);
  if (factor < 1) throw Error(Errc::bad_argument, "factor must be >= 1");
  if (pair.b_tilde.image.width % factor != 0 || pair.b_tilde.image.height % factor != 0) {
    throw Error(Errc::not_divisible, "frame dims not divisible by factor");
  }
  const TimeInterval instant{pair.t, pair.t};
  const Image teacher_full =
      teacher(instant, pair.b_t, slice(pair.stream, pair.b_t.exposure));
  const Image teacher_down = downsample(teacher_full, factor);

  BlurryFrame tilde_down{downsample(pair.b_tilde.image, factor), pair.b_tilde.exposure};
  const Image student_out =
      student(instant, tilde_down, slice(pair.stream, pair.b_tilde.exposure));
  return mean_abs_diff(teacher_down, student_out);
}

LossBreakdown total_loss(const DeblurOperator& op, const DeblurOperator& teacher,
                         const std::vector<TrainingPair>& batch,
                         const LossWeights& weights, int sg_factor) {
  if (batch.empty()) throw Error(Errc::bad_argument, "empty batch");
  LossBreakdown out;
  for (const TrainingPair& pair : batch) {
    out.bc += loss_bc(op, pair);
    out.sc += loss_sc(op, pair);
    if (weights.tg != 0.0) out.tg += loss_tg(teacher, op, pair);
    if (weights.sg != 0.0) out.sg += loss_sg(teacher, op, pair, sg_factor);
  }
  const double n = static_cast<double>(batch.size());
  out.bc /= n;
  out.sc /= n;
  out.tg /= n;
  out.sg /= n;
  out.total = weights.bc * out.bc + weights.sc * out.sc + weights.tg * out.tg +
              weights.sg * out.sg;
  return out;
}

ScaleSets scale_sets(const std::vector<double>& base_exposures, int m, double r_bar) {
  if (m < 1 || r_bar < 1.0) throw Error(Errc::bad_argument, "need M >= 1 and R >= 1");
  std::set<double> exposures;
  for (int k = 1; k <= m; ++k) {
    for (double t : base_exposures) exposures.insert(k * t);
  }
  ScaleSets out;
  out.exposures.assign(exposures.begin(), exposures.end());
  out.r_min = 1.0;
  out.r_max = r_bar;
  return out;
}

std::string format_loss_report(const std::vector<LossRow>& rows) {
  std::ostringstream os;
  for (const LossRow& row : rows) {
    os << "pair=" << row.id << "\n";
    os << "loss_bc=" << row.losses.bc << "\n";
    os << "loss_sc=" << row.losses.sc << "\n";
    os << "loss_tg=" << row.losses.tg << "\n";
    os << "loss_sg=" << row.losses.sg << "\n";
    os << "total=" << row.losses.total << "\n\n";
  }
  return os.str();
}

std::string format_loss_csv(const std::vector<LossRow>& rows) {
  std::ostringstream os;
  os << "pair,L_BC,L_SC,L_TG,L_SG,total\n";
  for (const LossRow& row : rows) {
    os << row.id << ',' << row.losses.bc << ',' << row.losses.sc << ','
       << row.losses.tg << ',' << row.losses.sg << ',' << row.losses.total << "\n";
  }
  return os.str();
}

}  // namespace evd
