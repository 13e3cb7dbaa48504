#include "icnet/loss.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace icnet {

std::vector<int> equation_var_indices(const Library& lib) {
  std::vector<int> out;
  for (std::size_t v = 0; v < lib.vars.size(); ++v) {
    if (lib.mode == LibraryMode::Galilean && lib.vars[v].kind != VarKind::Velocity) continue;
    if (lib.vars[v].kind == VarKind::Pressure) continue;
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::vector<int>> pinned_for_equations(const Library& lib) {
  const std::vector<int> eqs = equation_var_indices(lib);
  std::vector<std::vector<int>> out(eqs.size());
  for (std::size_t p = 0; p < lib.pinned.size(); ++p) {
    // the differentiated factor names the equation the pinned term serves
    int eq_var = -1;
    for (const auto& f : lib.pinned[p].factors)
      if (f.deriv.total() > 0) eq_var = f.var_id;
    if (eq_var < 0) throw std::invalid_argument("pinned term without derivative factor");
    for (std::size_t e = 0; e < eqs.size(); ++e)
      if (eqs[e] == eq_var) out[e].push_back(static_cast<int>(p));
  }
  return out;
}

namespace {

int slot_of(const DerivIndex& d, int ni) {
  const int total = d.total();
  if (total == 0) return 0;
  if (total == 1) {
    for (std::size_t a = 0; a < d.orders.size(); ++a)
      if (d.orders[a] == 1) return 1 + static_cast<int>(a) + 1;
  }
  if (total == 2) {
    int first = -1, second = -1;
    for (std::size_t a = 0; a < d.orders.size(); ++a) {
      if (d.orders[a] == 2) first = second = static_cast<int>(a);
      if (d.orders[a] == 1) (first < 0 ? first : second) = static_cast<int>(a);
    }
    return 1 + ni + pair_slot(first + 1, second + 1, ni);
  }
  throw std::invalid_argument("term derivative order above 2 is not supported by the surrogate");
}

}  // namespace

PdeLoss::PdeLoss(const Library& lib, const TrainingSet& ts, Surrogate* net, double alpha,
                 double beta)
    : lib_(lib), net_(net), alpha_(alpha), beta_(beta), dim_(ts.dim) {
  const int ni = dim_ + 1;
  const int nv = static_cast<int>(ts.var_names.size());
  if (net->spec().n_inputs != ni || net->spec().n_outputs != nv)
    throw std::invalid_argument("PdeLoss: surrogate shape does not match the training set");
  if (lib.vars.size() != ts.var_names.size())
    throw std::invalid_argument("PdeLoss: library vars do not match the training set");
  for (int v = 0; v < nv; ++v)
    if (lib.vars[v].name != ts.var_names[v])
      throw std::invalid_argument("PdeLoss: variable order mismatch");

  const std::int64_t n = ts.n_points();
  coords_.resize(n, ni);
  values_.resize(n, nv);
  for (std::int64_t p = 0; p < n; ++p) {
    for (int i = 0; i < ni; ++i) coords_(p, i) = ts.coords[p * ni + i];
    for (int v = 0; v < nv; ++v) values_(p, v) = ts.values[p * nv + v];
  }

  eq_vars_ = equation_var_indices(lib_);
  eq_pinned_ = pinned_for_equations(lib_);
  if (eq_vars_.empty()) throw std::invalid_argument("PdeLoss: library yields no equations");
  mask_.assign(eq_vars_.size(), std::vector<char>(lib_.terms.size(), 1));

  for (const auto& t : lib_.terms) c_terms_.push_back(compile(t));
  for (const auto& t : lib_.pinned) c_pinned_.push_back(compile(t));

  target_slot_ = lib_.target == TargetKind::FirstTimeDerivative
                     ? 1
                     : 1 + ni + pair_slot(0, 0, ni);

  // channel plan: every jet slot any compiled term or the target touches
  std::set<int> slots{0, target_slot_};
  for (const auto& ct : c_terms_)
    for (const auto& f : ct) slots.insert(f.slot);
  for (const auto& ct : c_pinned_)
    for (const auto& f : ct) slots.insert(f.slot);

  std::set<int> firsts;
  std::set<std::pair<int, int>> pairs;
  for (int s : slots) {
    if (s == 0) continue;
    if (s <= ni) {
      firsts.insert(s - 1);
    } else {
      const int ps = s - 1 - ni;
      int a = 0;
      while (pair_slot(a, ni - 1, ni) < ps) ++a;
      const int b = a + ps - pair_slot(a, a, ni);
      pairs.emplace(a, b);
      firsts.insert(a);
      firsts.insert(b);
    }
  }
  channels_.firsts.assign(firsts.begin(), firsts.end());
  channels_.pairs.assign(pairs.begin(), pairs.end());

  slot_to_channel_.assign(PointJet::slots_per_var(dim_), -1);
  slot_to_channel_[0] = 0;
  for (std::size_t i = 0; i < channels_.firsts.size(); ++i)
    slot_to_channel_[1 + channels_.firsts[i]] = 1 + static_cast<int>(i);
  for (std::size_t p = 0; p < channels_.pairs.size(); ++p)
    slot_to_channel_[1 + ni + pair_slot(channels_.pairs[p].first, channels_.pairs[p].second, ni)] =
        1 + static_cast<int>(channels_.firsts.size() + p);
}

PdeLoss::CompiledTerm PdeLoss::compile(const Term& t) const {
  CompiledTerm ct;
  for (const auto& f : t.factors) ct.push_back({f.var_id, slot_of(f.deriv, dim_ + 1), f.power});
  return ct;
}

int PdeLoss::n_net() const { return net_->n_params(); }

int PdeLoss::n_params() const {
  int n = n_net();
  for (const auto& pl : eq_pinned_) n += static_cast<int>(pl.size());
  n += n_equations() * n_library();
  return n;
}

void PdeLoss::set_mask(const std::vector<std::vector<char>>& mask) {
  if (mask.size() != mask_.size()) throw std::invalid_argument("set_mask: equation count");
  for (const auto& m : mask)
    if (m.size() != lib_.terms.size()) throw std::invalid_argument("set_mask: term count");
  mask_ = mask;
}

Eigen::VectorXd PdeLoss::pack(const CoefficientState& c) const {
  Eigen::VectorXd x(n_params());
  x.head(n_net()) = net_->get_params();
  int off = n_net();
  for (int e = 0; e < n_equations(); ++e)
    for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p) x[off++] = c.lambda[e][p];
  for (int e = 0; e < n_equations(); ++e)
    for (int j = 0; j < n_library(); ++j) x[off++] = mask_[e][j] ? c.Lambda[e][j] : 0.0;
  return x;
}

CoefficientState PdeLoss::unpack(const Eigen::VectorXd& x) const {
  CoefficientState c;
  int off = n_net();
  for (int e = 0; e < n_equations(); ++e) {
    c.lambda.emplace_back();
    for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p) c.lambda.back().push_back(x[off++]);
  }
  for (int e = 0; e < n_equations(); ++e) {
    c.Lambda.emplace_back();
    for (int j = 0; j < n_library(); ++j) {
      const double v = x[off++];
      c.Lambda.back().push_back(mask_[e][j] ? v : 0.0);
    }
  }
  c.mask = mask_;
  return c;
}

void PdeLoss::run_chunks(const Eigen::VectorXd& x, const std::vector<std::int64_t>* batch,
                         bool want_grad, Eigen::VectorXd* grad, LossParts* parts,
                         std::vector<Eigen::MatrixXd>* theta_out,
                         std::vector<Eigen::VectorXd>* y_out,
                         std::vector<Eigen::MatrixXd>* pinned_out, double& value) {
  if (x.size() != n_params()) throw std::invalid_argument("loss: parameter vector size");
  net_->set_params(x.head(n_net()));
  const CoefficientState cs = unpack(x);

  const int ni = dim_ + 1;
  const int nv = net_->spec().n_outputs;
  const int ne = n_equations();
  const int M = n_library();
  // with no physics weight and no feature request only the value channel
  // matters, which drops most of the jet propagation cost
  const bool data_only = alpha_ == 0.0 && !theta_out && !pinned_out;
  const JetChannels data_ch{{}, {}};
  const JetChannels& ch = data_only ? data_ch : channels_;
  const int nc = ch.count();
  const std::int64_t n = batch ? static_cast<std::int64_t>(batch->size()) : coords_.rows();
  const double wgt = 1.0 / static_cast<double>(n);

  if (theta_out) {
    theta_out->assign(ne, Eigen::MatrixXd(n, M));
    y_out->assign(ne, Eigen::VectorXd(n));
  }
  if (pinned_out) {
    pinned_out->clear();
    for (int e = 0; e < ne; ++e)
      pinned_out->emplace_back(n, static_cast<long>(eq_pinned_[e].size()));
  }

  double l_data = 0.0, l_phys = 0.0;
  // coefficient gradients, same layout as the tail of x
  std::vector<std::vector<double>> g_lambda(ne), g_Lambda(ne);
  for (int e = 0; e < ne; ++e) {
    g_lambda[e].assign(eq_pinned_[e].size(), 0.0);
    g_Lambda[e].assign(M, 0.0);
  }

  const auto& sd = net_->output_stds();
  const auto& mu = net_->output_means();
  const auto& sc = net_->input_scale();
  // physical scaling factor per channel (shared across variables)
  std::vector<double> chfac(nc, 1.0);
  for (std::size_t i = 0; i < ch.firsts.size(); ++i) chfac[1 + i] = sc[ch.firsts[i]];
  for (std::size_t p = 0; p < ch.pairs.size(); ++p)
    chfac[1 + ch.firsts.size() + p] = sc[ch.pairs[p].first] * sc[ch.pairs[p].second];

  const std::int64_t chunk = 1024;
  ChunkWork w;
  std::vector<Eigen::MatrixXd> phys(nc), adj(nc), out_adj(nc);
  std::vector<double> term_vals(M), pin_vals;

  for (std::int64_t start = 0; start < n; start += chunk) {
    const std::int64_t m = std::min(chunk, n - start);
    Eigen::MatrixXd cc(m, ni);
    for (std::int64_t q = 0; q < m; ++q) {
      const std::int64_t idx = batch ? (*batch)[start + q] : start + q;
      cc.row(q) = coords_.row(idx);
    }
    net_->forward(net_->normalize_inputs(cc), ch, w);

    for (int c = 0; c < nc; ++c) {
      phys[c] = w.out[c];
      for (int v = 0; v < nv; ++v) phys[c].row(v) *= sd[v] * chfac[c];
      if (c == 0)
        for (int v = 0; v < nv; ++v) phys[c].row(v).array() += mu[v];
      if (want_grad) adj[c] = Eigen::MatrixXd::Zero(nv, m);
    }

    const auto slot_val = [&](int v, int slot, std::int64_t q) -> double {
      const int c = slot_to_channel_[slot];
      return c < 0 ? 0.0 : phys[c](v, q);
    };
    const auto slot_adj = [&](int v, int slot, std::int64_t q, double g) {
      const int c = slot_to_channel_[slot];
      if (c >= 0) adj[c](v, q) += g;
    };
    // product of a compiled term and, optionally, adjoint g into its slots
    const auto term_eval = [&](const CompiledTerm& ct, std::int64_t q) {
      double prod = 1.0;
      for (const auto& f : ct) {
        const double b = slot_val(f.var, f.slot, q);
        for (int r = 0; r < f.power; ++r) prod *= b;
      }
      return prod;
    };
    const auto term_adj = [&](const CompiledTerm& ct, std::int64_t q, double g) {
      for (std::size_t k = 0; k < ct.size(); ++k) {
        double d = static_cast<double>(ct[k].power);
        for (std::size_t j = 0; j < ct.size(); ++j) {
          const double b = slot_val(ct[j].var, ct[j].slot, q);
          const int pw = ct[j].power - (j == k ? 1 : 0);
          for (int r = 0; r < pw; ++r) d *= b;
        }
        slot_adj(ct[k].var, ct[k].slot, q, g * d);
      }
    };

    for (std::int64_t q = 0; q < m; ++q) {
      const std::int64_t idx = batch ? (*batch)[start + q] : start + q;

      for (int v = 0; v < nv; ++v) {
        const double r = phys[0](v, q) - values_(idx, v);
        l_data += wgt * r * r;
        if (want_grad) adj[0](v, q) += 2.0 * wgt * r;
      }
      if (data_only) continue;

      for (int j = 0; j < M; ++j) term_vals[j] = term_eval(c_terms_[j], q);

      for (int e = 0; e < ne; ++e) {
        const int ve = eq_vars_[e];
        const double T = slot_val(ve, target_slot_, q);
        pin_vals.assign(eq_pinned_[e].size(), 0.0);
        double r = T;
        for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p) {
          pin_vals[p] = term_eval(c_pinned_[eq_pinned_[e][p]], q);
          r += cs.lambda[e][p] * pin_vals[p];
        }
        double fit = 0.0;
        for (int j = 0; j < M; ++j)
          if (mask_[e][j]) fit += cs.Lambda[e][j] * term_vals[j];
        r -= fit;

        if (theta_out) {
          for (int j = 0; j < M; ++j) (*theta_out)[e](start + q, j) = term_vals[j];
          (*y_out)[e](start + q) = T;
          for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p)
            (*y_out)[e](start + q) += cs.lambda[e][p] * pin_vals[p];
        }
        if (pinned_out)
          for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p)
            (*pinned_out)[e](start + q, static_cast<long>(p)) = pin_vals[p];

        l_phys += wgt * r * r;
        if (!want_grad) continue;
        const double g = 2.0 * wgt * alpha_ * r;
        slot_adj(ve, target_slot_, q, g);
        for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p) {
          g_lambda[e][p] += g * pin_vals[p];
          if (cs.lambda[e][p] != 0.0) term_adj(c_pinned_[eq_pinned_[e][p]], q, g * cs.lambda[e][p]);
        }
        for (int j = 0; j < M; ++j) {
          if (!mask_[e][j]) continue;
          g_Lambda[e][j] -= g * term_vals[j];
          if (cs.Lambda[e][j] != 0.0) term_adj(c_terms_[j], q, -g * cs.Lambda[e][j]);
        }
      }
    }

    if (want_grad) {
      for (int c = 0; c < nc; ++c) {
        out_adj[c] = adj[c];
        for (int v = 0; v < nv; ++v) out_adj[c].row(v) *= sd[v] * chfac[c];
      }
      Eigen::Map<Eigen::VectorXd> gnet(grad->data(), n_net());
      Eigen::VectorXd tmp = Eigen::VectorXd::Zero(n_net());
      net_->backward(ch, w, out_adj, tmp);
      gnet += tmp;
    }
  }

  double l1 = 0.0;
  for (int e = 0; e < ne; ++e)
    for (int j = 0; j < M; ++j)
      if (mask_[e][j]) l1 += std::abs(cs.Lambda[e][j]);

  value = l_data + alpha_ * l_phys + beta_ * l1;
  if (parts) {
    parts->data = l_data;
    parts->physics = l_phys;
    parts->l1 = l1;
    parts->total = value;
  }

  if (want_grad) {
    int off = n_net();
    for (int e = 0; e < ne; ++e)
      for (std::size_t p = 0; p < eq_pinned_[e].size(); ++p) (*grad)[off++] = g_lambda[e][p];
    for (int e = 0; e < ne; ++e)
      for (int j = 0; j < M; ++j) {
        double g = 0.0;
        if (mask_[e][j]) {
          g = g_Lambda[e][j];
          const double L = cs.Lambda[e][j];
          if (L > 0)
            g += beta_;
          else if (L < 0)
            g -= beta_;
        }
        (*grad)[off++] = g;
      }
  }
}

double PdeLoss::value_and_grad(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                               const std::vector<std::int64_t>* batch, LossParts* parts) {
  grad = Eigen::VectorXd::Zero(n_params());
  double value = 0.0;
  run_chunks(x, batch, true, &grad, parts, nullptr, nullptr, nullptr, value);
  return value;
}

void PdeLoss::features(const Eigen::VectorXd& x, std::vector<Eigen::MatrixXd>& theta,
                       std::vector<Eigen::VectorXd>& y, std::vector<Eigen::MatrixXd>* pinned) {
  double value = 0.0;
  run_chunks(x, nullptr, false, nullptr, nullptr, &theta, &y, pinned, value);
}

}  // namespace icnet
