#include "gsn/sampler.hpp"

#include "gsn/numeric.hpp"

namespace gsn {

void SampleRun::validate(Index visible_size) const {
  if (burn_in < 0 || num_samples < 0) throw ParameterError("burn_in and num_samples must be >= 0");
  if (thinning < 1) throw ParameterError("thinning must be >= 1");
  if (clamp_mask.has_value() != clamp_values.has_value())
    throw ParameterError("clamp_mask and clamp_values must be given together");
  if (clamp_mask && static_cast<Index>(clamp_mask->size()) != visible_size)
    throw ParameterError("clamp_mask length " + std::to_string(clamp_mask->size()) + " != visible size " +
                         std::to_string(visible_size));
  if (clamp_values && (clamp_values->rows() != visible_size || clamp_values->cols() != 1))
    throw ShapeError("clamp_values must be visible_size x 1, got " + shape_string(*clamp_values));
  if (initial_x && (initial_x->rows() != visible_size || initial_x->cols() != 1))
    throw ShapeError("initial_x must be visible_size x 1, got " + shape_string(*initial_x));
}

namespace {

Matrix starting_visible(const GsnModel& model, const SampleRun& run, Rng& rng) {
  if (run.initial_x) return *run.initial_x;
  const Index d = model.config().visible_size;
  if (model.config().visible_kind == VisibleKind::Binary) return bernoulli_sample(rng, Matrix::Constant(d, 1, 0.5));
  return Matrix::Zero(d, 1);
}

void apply_clamp(Matrix& x, const std::vector<bool>& mask, const Matrix& values) {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) x(static_cast<Index>(i), 0) = values(static_cast<Index>(i), 0);
}

template <typename Step>
std::vector<Matrix> run_chain(GsnState state, const SampleRun& run, Step&& step) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(run.num_samples));
  for (Index t = 0; t < run.burn_in; ++t) {
    state = step(state);
    if (run.observer) run.observer(state);
  }
  while (static_cast<Index>(out.size()) < run.num_samples) {
    for (Index k = 0; k < run.thinning; ++k) {
      state = step(state);
      if (run.observer) run.observer(state);
    }
    out.push_back(run.collect_mean_field ? state.x_mean : state.x);
  }
  return out;
}

}  // namespace

std::vector<Matrix> sample(const GsnModel& model, const SampleRun& run, Rng& rng) {
  run.validate(model.config().visible_size);
  if (run.num_samples == 0) return {};
  GsnState state = initial_state(model, starting_visible(model, run, rng));
  return run_chain(std::move(state), run, [&](const GsnState& s) { return chain_step(model, s, rng); });
}

ClampedUpdate clamped_visible_update(const GsnModel& model, const Matrix& h1, const std::vector<bool>& mask,
                                     const Matrix& clamp_values, Rng& rng) {
  ClampedUpdate u;
  u.mean = reconstruct(model, h1);
  u.x = sample_visible(model, u.mean, rng);
  for (Index c = 0; c < u.x.cols(); ++c)
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) u.x(static_cast<Index>(i), c) = clamp_values(static_cast<Index>(i), 0);
  return u;
}

std::vector<Matrix> sample_clamped(const GsnModel& model, const SampleRun& run, Rng& rng) {
  run.validate(model.config().visible_size);
  if (!run.clamp_mask) throw ParameterError("sample_clamped: clamp_mask is required");
  if (run.num_samples == 0) return {};
  const auto& mask = *run.clamp_mask;
  const Matrix& values = *run.clamp_values;

  Matrix x0 = starting_visible(model, run, rng);
  apply_clamp(x0, mask, values);
  GsnState state = initial_state(model, x0);

  return run_chain(std::move(state), run, [&](const GsnState& s) {
    GsnState next = half_step(model, s, Parity::Odd, rng);
    update_hidden(model, next, Parity::Even, rng);
    ClampedUpdate u = clamped_visible_update(model, next.h[0], mask, values, rng);
    next.x = std::move(u.x);
    next.x_mean = std::move(u.mean);
    apply_clamp(next.x_mean, mask, values);
    return next;
  });
}

Matrix stack_rows(const std::vector<Matrix>& samples) {
  if (samples.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Index>(samples.size()), samples.front().rows());
  for (std::size_t i = 0; i < samples.size(); ++i) out.row(static_cast<Index>(i)) = samples[i].col(0).transpose();
  return out;
}

}  // namespace gsn
