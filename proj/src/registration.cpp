#include "mrfmoco/registration.hpp"

#include <cmath>

#include "mrfmoco/threading.hpp"

namespace mrfmoco {

namespace {

// Box sum with fixed window voxel count (zero padding), separable.
RealVolume box_sum(const RealVolume &f, int window) {
  const Dims3 &d = f.dims();
  const int h = window / 2;
  RealVolume a = f, b(d, f.spacing());
  auto pass = [&](const RealVolume &src, RealVolume &dst, int axis) {
    int n[3] = {d.nx, d.ny, d.nz};
    if (n[axis] == 1) {
      dst = src;
      return;
    }
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          double acc = 0;
          for (int o = -h; o <= h; ++o) {
            int xi = x + (axis == 0 ? o : 0);
            int yi = y + (axis == 1 ? o : 0);
            int zi = z + (axis == 2 ? o : 0);
            if (xi < 0 || xi >= d.nx || yi < 0 || yi >= d.ny || zi < 0 ||
                zi >= d.nz)
              continue;
            acc += src(xi, yi, zi);
          }
          dst(x, y, z) = acc;
        }
  };
  pass(a, b, 0);
  pass(b, a, 1);
  if (d.nz > 1) {
    pass(a, b, 2);
    return b;
  }
  return a;
}

RealVolume hadamard(const RealVolume &a, const RealVolume &b) {
  RealVolume out(a.dims(), a.spacing());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

NccResult ncc_loss(const RealVolume &a, const RealVolume &b, int window,
                   bool want_grad) {
  if (a.dims() != b.dims()) throw DataError("ncc_loss: dims mismatch");
  if (window < 1 || window % 2 == 0) throw DataError("ncc window must be odd");
  const Dims3 &d = a.dims();
  const double eps = 1e-5;
  double win_count = window * window * (d.nz > 1 ? window : 1);

  RealVolume sa = box_sum(a, window);
  RealVolume sb = box_sum(b, window);
  RealVolume saa = box_sum(hadamard(a, a), window);
  RealVolume sbb = box_sum(hadamard(b, b), window);
  RealVolume sab = box_sum(hadamard(a, b), window);

  const std::size_t n = a.size();
  RealVolume cross(d), va(d), vb(d), ua(d), ub(d), cc_w(d), g2(d);
  double cc_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ua[i] = sa[i] / win_count;
    ub[i] = sb[i] / win_count;
    cross[i] = sab[i] - win_count * ua[i] * ub[i];
    va[i] = std::max(0.0, saa[i] - win_count * ua[i] * ua[i]);
    vb[i] = std::max(0.0, sbb[i] - win_count * ub[i] * ub[i]);
    double denom = va[i] * vb[i] + eps;
    double cc = cross[i] * cross[i] / denom;
    cc_sum += cc;
    // factors reused by the gradient
    cc_w[i] = cross[i] / denom;
    g2[i] = cross[i] * cross[i] * vb[i] / (denom * denom);
  }

  NccResult res;
  res.loss = 1.0 - cc_sum / double(n);

  if (want_grad) {
    RealVolume b_ccw = box_sum(cc_w, window);
    RealVolume b_ccw_ub = box_sum(hadamard(cc_w, ub), window);
    RealVolume b_g2 = box_sum(g2, window);
    RealVolume b_g2_ua = box_sum(hadamard(g2, ua), window);
    res.grad_a = RealVolume(d, a.spacing());
    for (std::size_t i = 0; i < n; ++i) {
      double t = b[i] * b_ccw[i] - b_ccw_ub[i] - a[i] * b_g2[i] + b_g2_ua[i];
      res.grad_a[i] = -2.0 / double(n) * t;
    }
  }
  return res;
}

double ncc_loss_value(const RealVolume &a, const RealVolume &b, int window) {
  return ncc_loss(a, b, window, false).loss;
}

namespace {

RealVolume downsample2(const RealVolume &v) {
  const Dims3 &d = v.dims();
  Dims3 o{(d.nx + 1) / 2, (d.ny + 1) / 2, d.nz};
  RealVolume out(o, {v.spacing().x * 2, v.spacing().y * 2, v.spacing().z});
  for (int z = 0; z < o.nz; ++z)
    for (int y = 0; y < o.ny; ++y)
      for (int x = 0; x < o.nx; ++x) {
        double acc = 0;
        int cnt = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int xi = 2 * x + dx, yi = 2 * y + dy;
            if (xi < d.nx && yi < d.ny) {
              acc += v(xi, yi, z);
              ++cnt;
            }
          }
        out(x, y, z) = acc / cnt;
      }
  return out;
}

struct Field2 {
  RealVolume ux, uy;  // displacement in voxels of the current level
};

Field2 upsample2(const Field2 &f, Dims3 target) {
  Field2 out;
  out.ux = RealVolume(target);
  out.uy = RealVolume(target);
  const Dims3 &s = f.ux.dims();
  for (int z = 0; z < target.nz; ++z)
    for (int y = 0; y < target.ny; ++y)
      for (int x = 0; x < target.nx; ++x) {
        double fx = std::min((x + 0.5) / 2.0 - 0.5, s.nx - 1.0);
        double fy = std::min((y + 0.5) / 2.0 - 0.5, s.ny - 1.0);
        fx = std::max(fx, 0.0);
        fy = std::max(fy, 0.0);
        out.ux(x, y, z) = 2.0 * sample_linear(f.ux, fx, fy, z);
        out.uy(x, y, z) = 2.0 * sample_linear(f.uy, fx, fy, z);
      }
  return out;
}

RealVolume warp_by(const Field2 &u, const RealVolume &img) {
  const Dims3 &d = img.dims();
  RealVolume out(d, img.spacing());
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        out(x, y, z) =
            sample_linear(img, x + u.ux(x, y, z), y + u.uy(x, y, z), double(z));
  return out;
}

// mean squared forward difference of both components over in-plane axes
double grad_penalty(const Field2 &u, Field2 *grad) {
  const Dims3 &d = u.ux.dims();
  double acc = 0;
  std::size_t terms = 0;
  if (grad) {
    grad->ux = RealVolume(d);
    grad->uy = RealVolume(d);
  }
  const RealVolume *comps[2] = {&u.ux, &u.uy};
  RealVolume *gcomps[2] = {grad ? &grad->ux : nullptr, grad ? &grad->uy : nullptr};
  for (int ci = 0; ci < 2; ++ci) {
    const RealVolume &c = *comps[ci];
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          if (x + 1 < d.nx) {
            double dfx = c(x + 1, y, z) - c(x, y, z);
            acc += dfx * dfx;
            ++terms;
            if (grad) {
              (*gcomps[ci])(x + 1, y, z) += 2 * dfx;
              (*gcomps[ci])(x, y, z) -= 2 * dfx;
            }
          }
          if (y + 1 < d.ny) {
            double dfy = c(x, y + 1, z) - c(x, y, z);
            acc += dfy * dfy;
            ++terms;
            if (grad) {
              (*gcomps[ci])(x, y + 1, z) += 2 * dfy;
              (*gcomps[ci])(x, y, z) -= 2 * dfy;
            }
          }
        }
  }
  if (terms == 0) return 0;
  if (grad)
    for (std::size_t i = 0; i < grad->ux.size(); ++i) {
      grad->ux[i] /= double(terms);
      grad->uy[i] /= double(terms);
    }
  return acc / double(terms);
}

// central-difference image gradients
void image_gradients(const RealVolume &img, RealVolume &gx, RealVolume &gy) {
  const Dims3 &d = img.dims();
  gx = RealVolume(d);
  gy = RealVolume(d);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        int xm = std::max(0, x - 1), xp = std::min(d.nx - 1, x + 1);
        int ym = std::max(0, y - 1), yp = std::min(d.ny - 1, y + 1);
        gx(x, y, z) = (img(xp, y, z) - img(xm, y, z)) / (xp - xm);
        gy(x, y, z) = (img(x, yp, z) - img(x, ym, z)) / (yp - ym);
      }
}

struct LevelProblem {
  RealVolume moving, fixed;
  RealVolume mgx, mgy;  // gradients of moving
};

double objective(const LevelProblem &lp, const Field2 &u, int window, double mu,
                 Field2 *grad) {
  RealVolume warped = warp_by(u, lp.moving);
  NccResult ncc = ncc_loss(warped, lp.fixed, window, grad != nullptr);
  Field2 reg_grad;
  double reg = grad_penalty(u, grad ? &reg_grad : nullptr);
  if (grad) {
    const Dims3 &d = warped.dims();
    grad->ux = RealVolume(d);
    grad->uy = RealVolume(d);
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          double gx = sample_linear(lp.mgx, x + u.ux(x, y, z), y + u.uy(x, y, z),
                                    double(z));
          double gy = sample_linear(lp.mgy, x + u.ux(x, y, z), y + u.uy(x, y, z),
                                    double(z));
          double gl = ncc.grad_a(x, y, z);
          grad->ux(x, y, z) = gl * gx + mu * reg_grad.ux(x, y, z);
          grad->uy(x, y, z) = gl * gy + mu * reg_grad.uy(x, y, z);
        }
  }
  return ncc.loss + mu * reg;
}

}  // namespace

DeformationField estimate_incremental(const RegistrationProblem &problem,
                                      RegistrationTrace *trace) {
  const RealVolume &moving = problem.moving;
  const RealVolume &fixed = problem.fixed;
  if (moving.dims() != fixed.dims())
    throw DataError("registration: volume dims mismatch");
  const RegistrationConfig &cfg = problem.config;
  const Dims3 &d = moving.dims();

  // coarse-to-fine pyramid (in-plane only)
  std::vector<LevelProblem> pyramid(cfg.levels);
  pyramid[0].moving = moving;
  pyramid[0].fixed = fixed;
  for (int l = 1; l < cfg.levels; ++l) {
    pyramid[l].moving = downsample2(pyramid[l - 1].moving);
    pyramid[l].fixed = downsample2(pyramid[l - 1].fixed);
  }
  for (auto &lp : pyramid) image_gradients(lp.moving, lp.mgx, lp.mgy);

  int per_level = std::max(1, cfg.epoch_budget / cfg.levels);
  Field2 u;
  u.ux = RealVolume(pyramid.back().moving.dims());
  u.uy = RealVolume(pyramid.back().moving.dims());

  int total_iters = 0;
  for (int l = cfg.levels - 1; l >= 0; --l) {
    const LevelProblem &lp = pyramid[l];
    if (u.ux.dims() != lp.moving.dims()) u = upsample2(u, lp.moving.dims());
    int window = std::max(3, cfg.ncc_window | 1);

    double step = cfg.step_voxels;
    Field2 g;
    double obj = objective(lp, u, window, cfg.mu, &g);
    std::vector<double> recent;
    recent.push_back(obj);
    if (trace) trace->objective.push_back(obj);

    for (int it = 0; it < per_level; ++it) {
      // largest gradient entry scales the step to a voxel-unit move
      double gmax = 1e-30;
      for (std::size_t i = 0; i < g.ux.size(); ++i)
        gmax = std::max({gmax, std::abs(g.ux[i]), std::abs(g.uy[i])});
      bool accepted = false;
      while (step > 1e-12) {
        Field2 cand;
        cand.ux = u.ux;
        cand.uy = u.uy;
        double scale = step / gmax;
        for (std::size_t i = 0; i < cand.ux.size(); ++i) {
          cand.ux[i] -= scale * g.ux[i];
          cand.uy[i] -= scale * g.uy[i];
        }
        double cobj = objective(lp, cand, window, cfg.mu, nullptr);
        if (!std::isfinite(cobj))
          throw SolverError("registration objective diverged");
        if (cobj <= obj) {
          u = std::move(cand);
          obj = cobj;
          accepted = true;
          step = std::min(step * 1.2, 4.0 * cfg.step_voxels);
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // step exhausted at a numerical minimum
      ++total_iters;
      objective(lp, u, window, cfg.mu, &g);  // refresh gradient
      if (trace) trace->objective.push_back(obj);
      recent.push_back(obj);
      if (static_cast<int>(recent.size()) > cfg.tol_window) {
        double past = recent[recent.size() - 1 - cfg.tol_window];
        if (past > 0 && (past - obj) / past < cfg.tol_rel) break;
      }
    }
  }

  DeformationField field;
  field.u = Grid3<Vec3>(d, moving.spacing());
  field.source_phase = problem.moving_phase;
  field.target_phase = problem.fixed_phase;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        field.u(x, y, z) = Vec3{u.ux(x, y, z) * moving.spacing().x,
                                u.uy(x, y, z) * moving.spacing().y, 0.0};
  if (trace) trace->iterations = total_iters;
  return field;
}

std::vector<std::vector<DeformationField>> estimate_all(
    const std::vector<RealVolume> &phase_volumes,
    const RegistrationConfig &config) {
  const int M = static_cast<int>(phase_volumes.size());
  if (M < 2) throw DataError("estimate_all needs at least two phases");
  const Dims3 &d = phase_volumes[0].dims();
  const Vec3 &sp = phase_volumes[0].spacing();

  std::vector<std::vector<DeformationField>> fields(
      M, std::vector<DeformationField>(M));
  for (int m = 0; m < M; ++m) {
    fields[m][m] = DeformationField::identity(d, sp, m + 1);
  }

  // adjacent pairs, both directions; parallel across pairs
  struct Job {
    int from, to;
  };
  std::vector<Job> jobs;
  for (int m = 0; m + 1 < M; ++m) {
    jobs.push_back({m, m + 1});
    jobs.push_back({m + 1, m});
  }
  parallel_for(jobs.size(), [&](std::size_t j) {
    RegistrationProblem p;
    p.moving = phase_volumes[jobs[j].from];
    p.fixed = phase_volumes[jobs[j].to];
    p.moving_phase = jobs[j].from + 1;
    p.fixed_phase = jobs[j].to + 1;
    p.config = config;
    fields[jobs[j].from][jobs[j].to] = estimate_incremental(p);
  });

  // longer chains composed from the increments
  for (int from = 0; from < M; ++from) {
    for (int to = from + 2; to < M; ++to)
      fields[from][to] = compose(fields[from][to - 1], fields[to - 1][to]);
    for (int to = from - 2; to >= 0; --to)
      fields[from][to] = compose(fields[from][to + 1], fields[to + 1][to]);
  }
  return fields;
}

}  // namespace mrfmoco
