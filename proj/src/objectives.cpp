#include "jclr/objectives.hpp"

#include <cmath>

namespace jclr {

double js_mi(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw ValidationError("js_mi needs at least one positive and one negative score");
  }
  double pos = 0.0;
  for (double s : pos_scores) pos -= softplus(-s);
  double neg = 0.0;
  for (double s : neg_scores) neg += softplus(s);
  return pos / static_cast<double>(pos_scores.size()) -
         neg / static_cast<double>(neg_scores.size());
}

void LossWeights::validate() const {
  for (double v : {ss, tt, st}) {
    if (v < 0.0 || v > 1.0) {
      throw ValidationError(cat("loss weight ", v, " outside [0,1]"));
    }
  }
  if (std::abs(ss + tt + st - 1.0) > 1e-9) {
    throw ValidationError(cat("loss weights must sum to 1, got ", ss + tt + st));
  }
}

double loss_ss(const Matrix& H_S, const BatchContrastPlan& plan, Matrix* d_hs,
               double grad_scale) {
  double acc = 0.0;
  std::size_t anchors = 0;
  for (const RoadContrast& rc : plan.road) {
    if (rc.positives.empty()) continue;
    ++anchors;
  }
  if (anchors == 0) return 0.0;
  const double outer = 1.0 / static_cast<double>(anchors);

  for (const RoadContrast& rc : plan.road) {
    if (rc.positives.empty()) continue;
    const SegmentId i = plan.segments[rc.anchor];
    double mi = 0.0;
    const double inv_p = 1.0 / static_cast<double>(rc.positives.size());
    for (int p : rc.positives) {
      const SegmentId j = plan.segments[p];
      const double s = H_S.row(i).dot(H_S.row(j));
      mi -= softplus(-s) * inv_p;
      if (d_hs) {
        // dL/ds = -outer * inv_p * sigmoid(-s)
        const double coef = -grad_scale * outer * inv_p * sigmoid(-s);
        d_hs->row(i) += coef * H_S.row(j);
        d_hs->row(j) += coef * H_S.row(i);
      }
    }
    if (!rc.negatives.empty()) {
      const double inv_n = 1.0 / static_cast<double>(rc.negatives.size());
      for (int nidx : rc.negatives) {
        const SegmentId k = plan.segments[nidx];
        const double s = H_S.row(i).dot(H_S.row(k));
        mi -= softplus(s) * inv_n;
        if (d_hs) {
          // dL/ds = +outer * inv_n * sigmoid(s)
          const double coef = grad_scale * outer * inv_n * sigmoid(s);
          d_hs->row(i) += coef * H_S.row(k);
          d_hs->row(k) += coef * H_S.row(i);
        }
      }
    }
    acc += mi;
  }
  return -acc * outer;
}

double loss_tt(const Matrix& traj_embeds, const Matrix& view_embeds,
               Matrix* d_traj, Matrix* d_view, double grad_scale) {
  const auto batch = traj_embeds.rows();
  if (batch != view_embeds.rows()) {
    throw ValidationError("loss_tt: trajectory and view batches differ");
  }
  if (batch < 2) {
    throw ValidationError("loss_tt requires a batch of at least 2 trajectories");
  }
  const double outer = 1.0 / static_cast<double>(batch);
  const double inv_n = 1.0 / static_cast<double>(batch - 1);

  double acc = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double s_pos = view_embeds.row(i).dot(traj_embeds.row(i));
    double mi = -softplus(-s_pos);
    if (d_traj) {
      const double coef = -grad_scale * outer * sigmoid(-s_pos);
      d_traj->row(i) += coef * view_embeds.row(i);
      d_view->row(i) += coef * traj_embeds.row(i);
    }
    for (Eigen::Index j = 0; j < batch; ++j) {
      if (j == i) continue;
      const double s_neg = view_embeds.row(j).dot(traj_embeds.row(i));
      mi -= softplus(s_neg) * inv_n;
      if (d_traj) {
        const double coef = grad_scale * outer * inv_n * sigmoid(s_neg);
        d_traj->row(i) += coef * view_embeds.row(j);
        d_view->row(j) += coef * traj_embeds.row(i);
      }
    }
    acc += mi;
  }
  return -acc * outer;
}

double loss_st_weighted(const Matrix& H_S, const Matrix& traj_embeds,
                        const BatchContrastPlan& plan, Matrix* d_hs,
                        Matrix* d_traj, double grad_scale) {
  auto usable = [&](const StContrast& sc) {
    double w_sum = 0.0;
    for (double w : sc.pos_weights) w_sum += w;
    return !sc.pos_segments.empty() && w_sum > 0.0;
  };
  std::size_t entries = 0;
  for (const StContrast& sc : plan.st) {
    if (usable(sc)) ++entries;
  }
  if (entries == 0) return 0.0;
  const double outer = 1.0 / static_cast<double>(entries);

  double acc = 0.0;
  for (const StContrast& sc : plan.st) {
    if (!usable(sc)) continue;
    const Eigen::Index t = sc.trajectory;
    double w_sum = 0.0;
    for (double w : sc.pos_weights) w_sum += w;
    const double norm = plan.literal_st_norm
                            ? static_cast<double>(plan.total_segments)
                            : w_sum;

    double mi = 0.0;
    for (std::size_t k = 0; k < sc.pos_segments.size(); ++k) {
      const SegmentId s_id = plan.segments[sc.pos_segments[k]];
      const double w = sc.pos_weights[k];
      const double s = H_S.row(s_id).dot(traj_embeds.row(t));
      mi -= w / norm * softplus(-s);
      if (d_hs) {
        const double coef = -grad_scale * outer * w / norm * sigmoid(-s);
        d_hs->row(s_id) += coef * traj_embeds.row(t);
        d_traj->row(t) += coef * H_S.row(s_id);
      }
    }
    if (!sc.neg_segments.empty()) {
      const double inv_n = 1.0 / static_cast<double>(sc.neg_segments.size());
      for (int nidx : sc.neg_segments) {
        const SegmentId s_id = plan.segments[nidx];
        const double s = H_S.row(s_id).dot(traj_embeds.row(t));
        mi -= softplus(s) * inv_n;
        if (d_hs) {
          const double coef = grad_scale * outer * inv_n * sigmoid(s);
          d_hs->row(s_id) += coef * traj_embeds.row(t);
          d_traj->row(t) += coef * H_S.row(s_id);
        }
      }
    }
    acc += mi;
  }
  return -acc * outer;
}

double total_loss(double l_ss, double l_tt, double l_st, const LossWeights& w) {
  w.validate();
  return w.ss * l_ss + w.tt * l_tt + w.st * l_st;
}

}  // namespace jclr
