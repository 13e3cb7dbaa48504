#include "icnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icnet/rng.hpp"

namespace icnet {

JetChannels JetChannels::full(int n_inputs) {
  JetChannels ch;
  for (int i = 0; i < n_inputs; ++i) ch.firsts.push_back(i);
  for (int a = 0; a < n_inputs; ++a)
    for (int b = a; b < n_inputs; ++b) ch.pairs.emplace_back(a, b);
  return ch;
}

Surrogate::Surrogate(const MlpSpec& spec) : spec_(spec) {
  if (spec.n_inputs < 1 || spec.n_outputs < 1 || spec.hidden.empty())
    throw std::invalid_argument("Surrogate: bad spec");
  widths_.push_back(spec.n_inputs);
  for (int h : spec.hidden) widths_.push_back(h);
  widths_.push_back(spec.n_outputs);

  int off = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    w_offset_.push_back(off);
    off += widths_[l + 1] * widths_[l];
    b_offset_.push_back(off);
    off += widths_[l + 1];
  }
  n_params_ = off;
  params_.resize(n_params_);
  init_params();

  in_shift_.assign(spec.n_inputs, 0.0);
  in_scale_.assign(spec.n_inputs, 1.0);
  out_mean_.assign(spec.n_outputs, 0.0);
  out_std_.assign(spec.n_outputs, 1.0);
}

void Surrogate::init_params() {
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int fan_in = widths_[l], fan_out = widths_[l + 1];
    const double std = std::sqrt(2.0 / (fan_in + fan_out));
    const std::uint64_t k = rng::key(spec_.seed, 100 + l);
    for (int i = 0; i < fan_out * fan_in; ++i)
      params_[w_offset_[l] + i] = std * rng::normal(k, i);
    for (int i = 0; i < fan_out; ++i) params_[b_offset_[l] + i] = 0.0;
  }
}

void Surrogate::set_params(const Eigen::VectorXd& p) {
  if (p.size() != n_params_) throw std::invalid_argument("set_params: size mismatch");
  params_ = p;
}

Eigen::Map<const Eigen::MatrixXd> Surrogate::weight(int layer) const {
  return {params_.data() + w_offset_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Surrogate::bias(int layer) const {
  return {params_.data() + b_offset_[layer], widths_[layer + 1]};
}

void Surrogate::set_input_box(const std::vector<double>& mins, const std::vector<double>& maxs) {
  if (static_cast<int>(mins.size()) != spec_.n_inputs || maxs.size() != mins.size())
    throw std::invalid_argument("set_input_box: size mismatch");
  for (int i = 0; i < spec_.n_inputs; ++i) {
    const double span = maxs[i] - mins[i];
    in_shift_[i] = 0.5 * (maxs[i] + mins[i]);
    in_scale_[i] = span > 0 ? 2.0 / span : 1.0;
  }
}

void Surrogate::set_output_affine(const std::vector<double>& means,
                                  const std::vector<double>& stds) {
  if (static_cast<int>(means.size()) != spec_.n_outputs || stds.size() != means.size())
    throw std::invalid_argument("set_output_affine: size mismatch");
  out_mean_ = means;
  out_std_ = stds;
  for (double& s : out_std_)
    if (!(s > 0)) s = 1.0;
}

void Surrogate::calibrate(const TrainingSet& ts) {
  const int ni = ts.dim + 1;
  if (ni != spec_.n_inputs || static_cast<int>(ts.var_names.size()) != spec_.n_outputs)
    throw std::invalid_argument("calibrate: training set shape mismatch");
  const std::int64_t n = ts.n_points();
  if (n < 2) throw std::invalid_argument("calibrate: too few points");
  std::vector<double> mins(ni, 1e300), maxs(ni, -1e300);
  for (std::int64_t p = 0; p < n; ++p)
    for (int i = 0; i < ni; ++i) {
      const double c = ts.coords[p * ni + i];
      mins[i] = std::min(mins[i], c);
      maxs[i] = std::max(maxs[i], c);
    }
  set_input_box(mins, maxs);

  const int nv = spec_.n_outputs;
  std::vector<double> mean(nv, 0.0), var(nv, 0.0);
  for (std::int64_t p = 0; p < n; ++p)
    for (int v = 0; v < nv; ++v) mean[v] += ts.values[p * nv + v];
  for (int v = 0; v < nv; ++v) mean[v] /= static_cast<double>(n);
  for (std::int64_t p = 0; p < n; ++p)
    for (int v = 0; v < nv; ++v) {
      const double d = ts.values[p * nv + v] - mean[v];
      var[v] += d * d;
    }
  std::vector<double> std(nv);
  for (int v = 0; v < nv; ++v) std[v] = std::sqrt(var[v] / static_cast<double>(n));
  set_output_affine(mean, std);
}

Eigen::MatrixXd Surrogate::normalize_inputs(const Eigen::MatrixXd& coords) const {
  if (coords.cols() != spec_.n_inputs)
    throw std::invalid_argument("normalize_inputs: column count mismatch");
  Eigen::MatrixXd xn(spec_.n_inputs, coords.rows());
  for (int i = 0; i < spec_.n_inputs; ++i)
    xn.row(i) = ((coords.col(i).array() - in_shift_[i]) * in_scale_[i]).transpose();
  return xn;
}

void Surrogate::forward(const Eigen::MatrixXd& xn, const JetChannels& ch, ChunkWork& w) const {
  const int n = static_cast<int>(xn.cols());
  const int nf = static_cast<int>(ch.firsts.size());
  const int np = static_cast<int>(ch.pairs.size());
  const int depth = static_cast<int>(spec_.hidden.size());

  w.input.assign(1 + nf + np, Eigen::MatrixXd());
  w.input[0] = xn;
  for (int i = 0; i < nf; ++i) {
    w.input[1 + i] = Eigen::MatrixXd::Zero(spec_.n_inputs, n);
    w.input[1 + i].row(ch.firsts[i]).setOnes();
  }
  for (int p = 0; p < np; ++p) w.input[1 + nf + p] = Eigen::MatrixXd::Zero(spec_.n_inputs, n);

  w.act.assign(depth, Eigen::MatrixXd());
  w.dz.assign(depth, {});
  w.d2z.assign(depth, {});

  // running activation channels
  std::vector<Eigen::MatrixXd> a = w.input;
  for (int l = 0; l < depth; ++l) {
    const auto W = weight(l);
    Eigen::MatrixXd z = W * a[0];
    z.colwise() += bias(l);
    w.dz[l].resize(nf);
    for (int i = 0; i < nf; ++i) w.dz[l][i] = W * a[1 + i];
    w.d2z[l].resize(np);
    for (int p = 0; p < np; ++p) w.d2z[l][p] = W * a[1 + nf + p];

    w.act[l] = z.array().tanh();
    const Eigen::ArrayXXd av = w.act[l].array();
    const Eigen::ArrayXXd s = 1.0 - av.square();
    a[0] = w.act[l];
    for (int i = 0; i < nf; ++i) a[1 + i] = (s * w.dz[l][i].array()).matrix();
    for (int p = 0; p < np; ++p) {
      const auto [pa, pb] = ch.pairs[p];
      const int ia = static_cast<int>(std::find(ch.firsts.begin(), ch.firsts.end(), pa) -
                                      ch.firsts.begin());
      const int ib = static_cast<int>(std::find(ch.firsts.begin(), ch.firsts.end(), pb) -
                                      ch.firsts.begin());
      if (ia >= nf || ib >= nf)
        throw std::invalid_argument("forward: second-derivative pair without its first-derivative channels");
      a[1 + nf + p] = (s * w.d2z[l][p].array() -
                       2.0 * av * s * w.dz[l][ia].array() * w.dz[l][ib].array())
                          .matrix();
    }
  }

  const auto W = weight(depth);
  w.out.assign(1 + nf + np, Eigen::MatrixXd());
  w.out[0] = W * a[0];
  w.out[0].colwise() += bias(depth);
  for (int c = 1; c < 1 + nf + np; ++c) w.out[c] = W * a[c];
}

void Surrogate::backward(const JetChannels& ch, const ChunkWork& w,
                         const std::vector<Eigen::MatrixXd>& out_adj,
                         Eigen::VectorXd& grad) const {
  const int nf = static_cast<int>(ch.firsts.size());
  const int np = static_cast<int>(ch.pairs.size());
  const int nc = 1 + nf + np;
  const int depth = static_cast<int>(spec_.hidden.size());

  // indices of the first-derivative channels referenced by each pair
  std::vector<std::pair<int, int>> pair_first(np);
  for (int p = 0; p < np; ++p) {
    const auto [pa, pb] = ch.pairs[p];
    pair_first[p] = {
        static_cast<int>(std::find(ch.firsts.begin(), ch.firsts.end(), pa) - ch.firsts.begin()),
        static_cast<int>(std::find(ch.firsts.begin(), ch.firsts.end(), pb) - ch.firsts.begin())};
  }

  // recompute the activation channels of layer l from stored state
  const auto act_channels = [&](int l) {
    std::vector<Eigen::MatrixXd> a(nc);
    if (l < 0) return w.input;
    const Eigen::ArrayXXd av = w.act[l].array();
    const Eigen::ArrayXXd s = 1.0 - av.square();
    a[0] = w.act[l];
    for (int i = 0; i < nf; ++i) a[1 + i] = (s * w.dz[l][i].array()).matrix();
    for (int p = 0; p < np; ++p) {
      const auto [ia, ib] = pair_first[p];
      a[1 + nf + p] = (s * w.d2z[l][p].array() -
                       2.0 * av * s * w.dz[l][ia].array() * w.dz[l][ib].array())
                          .matrix();
    }
    return a;
  };

  // adjoints on the z channels of the current layer, starting from the
  // (linear) output layer where z == out
  std::vector<Eigen::MatrixXd> zadj = out_adj;
  for (int l = depth; l >= 0; --l) {
    const auto W = weight(l);
    const std::vector<Eigen::MatrixXd> a_prev = act_channels(l - 1);

    Eigen::Map<Eigen::MatrixXd> dW(grad.data() + w_offset_[l], widths_[l + 1], widths_[l]);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + b_offset_[l], widths_[l + 1]);
    for (int c = 0; c < nc; ++c) dW.noalias() += zadj[c] * a_prev[c].transpose();
    db.noalias() += zadj[0].rowwise().sum();

    if (l == 0) break;

    std::vector<Eigen::MatrixXd> aadj(nc);
    for (int c = 0; c < nc; ++c) aadj[c] = W.transpose() * zadj[c];

    // through tanh of layer l-1
    const int h = l - 1;
    const Eigen::ArrayXXd av = w.act[h].array();
    const Eigen::ArrayXXd s = 1.0 - av.square();
    const Eigen::ArrayXXd as = av * s;

    std::vector<Eigen::MatrixXd> znew(nc);
    Eigen::ArrayXXd zv = s * aadj[0].array();
    for (int i = 0; i < nf; ++i) zv -= 2.0 * as * w.dz[h][i].array() * aadj[1 + i].array();
    for (int i = 0; i < nf; ++i) znew[1 + i] = (s * aadj[1 + i].array()).matrix();
    for (int p = 0; p < np; ++p) {
      const auto [ia, ib] = pair_first[p];
      const Eigen::ArrayXXd padj = aadj[1 + nf + p].array();
      zv -= 2.0 * as * w.d2z[h][p].array() * padj;
      zv -= 2.0 * s * (s - 2.0 * av.square()) * w.dz[h][ia].array() * w.dz[h][ib].array() * padj;
      znew[1 + ia].array() -= 2.0 * as * w.dz[h][ib].array() * padj;
      znew[1 + ib].array() -= 2.0 * as * w.dz[h][ia].array() * padj;
      znew[1 + nf + p] = (s * padj).matrix();
    }
    znew[0] = zv.matrix();
    zadj = std::move(znew);
  }
}

std::vector<PointJet> Surrogate::jets(const Eigen::MatrixXd& coords) const {
  const int ni = spec_.n_inputs;
  const int dim = ni - 1;
  const int nv = spec_.n_outputs;
  const JetChannels ch = JetChannels::full(ni);
  const std::int64_t n = coords.rows();
  std::vector<PointJet> out(n, PointJet(dim, nv));

  const std::int64_t chunk = 1024;
  ChunkWork w;
  for (std::int64_t start = 0; start < n; start += chunk) {
    const std::int64_t m = std::min(chunk, n - start);
    const Eigen::MatrixXd xn = normalize_inputs(coords.middleRows(start, m));
    forward(xn, ch, w);
    for (std::int64_t q = 0; q < m; ++q) {
      PointJet& j = out[start + q];
      for (int v = 0; v < nv; ++v) {
        const double sd = out_std_[v];
        j.value(v) = sd * w.out[0](v, q) + out_mean_[v];
        for (int i = 0; i < ni; ++i) j.d1(v, i) = sd * in_scale_[i] * w.out[1 + i](v, q);
        int p = 0;
        for (int a = 0; a < ni; ++a)
          for (int b = a; b < ni; ++b, ++p)
            j.d2(v, a, b) = sd * in_scale_[a] * in_scale_[b] * w.out[1 + ni + p](v, q);
      }
    }
  }
  return out;
}

Eigen::MatrixXd Surrogate::values(const Eigen::MatrixXd& coords) const {
  const std::int64_t n = coords.rows();
  Eigen::MatrixXd out(n, spec_.n_outputs);
  const JetChannels ch;  // value channel only
  const std::int64_t chunk = 4096;
  ChunkWork w;
  for (std::int64_t start = 0; start < n; start += chunk) {
    const std::int64_t m = std::min(chunk, n - start);
    const Eigen::MatrixXd xn = normalize_inputs(coords.middleRows(start, m));
    forward(xn, ch, w);
    for (std::int64_t q = 0; q < m; ++q)
      for (int v = 0; v < spec_.n_outputs; ++v)
        out(start + q, v) = out_std_[v] * w.out[0](v, q) + out_mean_[v];
  }
  return out;
}

}  // namespace icnet
