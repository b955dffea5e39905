#include "lsic/lstm.hpp"

namespace lsic {

LstmCell LstmCell::create(ParamSet& ps, const std::string& prefix,
                          LstmDims dims) {
  LstmCell cell;
  cell.dims = dims;
  cell.W = ps.add(prefix + ".W", {3 * dims.hidden, dims.concat()});
  cell.bW = ps.add(prefix + ".bW", {3 * dims.hidden});
  cell.V = ps.add(prefix + ".V", {dims.hidden, dims.concat()});
  cell.bV = ps.add(prefix + ".bV", {dims.hidden});
  return cell;
}

void lstm_step(const LstmCell& cell, const Vec& h_prev, const Vec& c_prev,
               const Vec& x, const Vec* ctx, LstmStepCache& out) {
  const int H = cell.dims.hidden;
  if (h_prev.size() != H || c_prev.size() != H || x.size() != cell.dims.input)
    throw std::invalid_argument("lstm_step: state/input shape mismatch");
  if (cell.dims.context > 0) {
    if (ctx == nullptr || ctx->size() != cell.dims.context)
      throw std::invalid_argument("lstm_step: missing or mis-sized context");
  } else if (ctx != nullptr && ctx->size() != 0) {
    throw std::invalid_argument("lstm_step: context given to a cell without a slot");
  }

  out.u.resize(cell.dims.concat());
  out.u.head(H) = h_prev;
  out.u.segment(H, cell.dims.input) = x;
  if (cell.dims.context > 0) out.u.tail(cell.dims.context) = *ctx;

  Vec gates = cell.W->mat() * out.u + cell.bW->vec();
  gates = (real(1) + (-gates.array()).exp()).inverse().matrix();
  out.f = gates.head(H);
  out.i = gates.segment(H, H);
  out.o = gates.tail(H);
  out.l = ((cell.V->mat() * out.u + cell.bV->vec()).array().tanh()).matrix();
  out.c = (out.f.array() * c_prev.array() + out.i.array() * out.l.array()).matrix();
  out.tanh_c = out.c.array().tanh().matrix();
  out.h = (out.o.array() * out.tanh_c.array()).matrix();
}

void lstm_step_backward(const LstmCell& cell, const LstmStepCache& cache,
                        const Vec& c_prev, const Vec& dh, const Vec& dc,
                        LstmStepGrads& out) {
  const int H = cell.dims.hidden;
  Vec dc_total = dc;
  if (dc_total.size() == 0) dc_total = Vec::Zero(H);
  Vec dh_eff = dh;
  if (dh_eff.size() == 0) dh_eff = Vec::Zero(H);

  // h = o .* tanh(c)
  const Vec do_ = (dh_eff.array() * cache.tanh_c.array()).matrix();
  dc_total.array() +=
      dh_eff.array() * cache.o.array() * (1 - cache.tanh_c.array().square());

  // c = f .* c_prev + i .* l
  const Vec df = (dc_total.array() * c_prev.array()).matrix();
  const Vec di = (dc_total.array() * cache.l.array()).matrix();
  const Vec dl = (dc_total.array() * cache.i.array()).matrix();
  out.dc_prev = (dc_total.array() * cache.f.array()).matrix();

  Vec da(3 * H);
  da.head(H) = (df.array() * cache.f.array() * (1 - cache.f.array())).matrix();
  da.segment(H, H) =
      (di.array() * cache.i.array() * (1 - cache.i.array())).matrix();
  da.tail(H) = (do_.array() * cache.o.array() * (1 - cache.o.array())).matrix();
  const Vec dlpre = (dl.array() * (1 - cache.l.array().square())).matrix();

  cell.W->grad_mat() += da * cache.u.transpose();
  cell.bW->grad_vec() += da;
  cell.V->grad_mat() += dlpre * cache.u.transpose();
  cell.bV->grad_vec() += dlpre;

  const Vec du =
      cell.W->mat().transpose() * da + cell.V->mat().transpose() * dlpre;
  out.dh_prev = du.head(H);
  out.dx = du.segment(H, cell.dims.input);
  if (cell.dims.context > 0)
    out.dctx = du.tail(cell.dims.context);
  else
    out.dctx.resize(0);
}

Vec embed_session_input(const InputEmbedder& emb, const SessionVec& session) {
  Vec x = Vec::Zero(emb.input_dim);
  if (session.empty()) return x;
  const real inv = real(1) / real(session.size());
  for (const auto& entry : session)
    x += (entry.rating / real(5) * inv) *
         emb.table->row(entry.counterpart).matrix().transpose();
  return x;
}

void embed_session_backward(const InputEmbedder& emb, const SessionVec& session,
                            const Vec& dx) {
  if (session.empty()) return;
  const real inv = real(1) / real(session.size());
  for (const auto& entry : session)
    emb.table->grad_row(entry.counterpart) +=
        (entry.rating / real(5) * inv) * dx.transpose();
}

const Vec& Trajectory::state_at(int t) const {
  const int idx = content_steps + t;
  if (t < 0 || idx >= static_cast<int>(steps.size()))
    throw std::out_of_range("trajectory: session index " + std::to_string(t) +
                            " beyond encoded range");
  return steps[idx].cache.h;
}

const Vec& Trajectory::state_entering(int t) const {
  if (t < 0 || t > session_count())
    throw std::out_of_range("trajectory: session index out of range");
  const int idx = content_steps + t - 1;
  if (idx < 0) return h0;
  return steps[idx].cache.h;
}

Trajectory encode_trajectory(const LstmCell& cell, const InputEmbedder* emb,
                             const std::vector<SessionVec>& sessions,
                             const Vec* content_x,
                             const ContextForwardFn& ctx_fn,
                             const Vec* h0_override, bool heavy) {
  const int H = cell.dims.hidden;
  Trajectory traj;
  traj.heavy = heavy;
  traj.h0 = h0_override ? *h0_override : Vec::Zero(H);
  traj.c0 = Vec::Zero(H);
  if (traj.h0.size() != H)
    throw std::invalid_argument("encode_trajectory: bad initial state size");
  if (cell.dims.context > 0 && !ctx_fn)
    throw std::invalid_argument(
        "encode_trajectory: cell has a context slot but no context source");

  const Vec* h = &traj.h0;
  const Vec* c = &traj.c0;
  traj.steps.reserve(sessions.size() + (content_x ? 1 : 0));

  auto run_step = [&](const SessionVec* session, Vec x, int step_index) {
    Trajectory::Step step;
    step.session = session;
    step.x = std::move(x);
    Vec ctx;
    if (cell.dims.context > 0) {
      ctx = ctx_fn(step_index, *h);
      step.ctx = ctx;
    }
    lstm_step(cell, *h, *c, step.x, cell.dims.context > 0 ? &ctx : nullptr,
              step.cache);
    if (!heavy) {
      // Keep only what scoring needs.
      Vec keep_h = step.cache.h;
      Vec keep_c = step.cache.c;
      step.cache = LstmStepCache{};
      step.cache.h = std::move(keep_h);
      step.cache.c = std::move(keep_c);
      step.x.resize(0);
      step.ctx.resize(0);
    }
    traj.steps.push_back(std::move(step));
    h = &traj.steps.back().cache.h;
    c = &traj.steps.back().cache.c;
  };

  int step_index = 0;
  if (content_x != nullptr) {
    if (content_x->size() != cell.dims.input)
      throw std::invalid_argument("encode_trajectory: content input size");
    traj.content_steps = 1;
    run_step(nullptr, *content_x, step_index++);
  }
  for (const auto& session : sessions) {
    Vec x = emb ? embed_session_input(*emb, session) : Vec::Zero(cell.dims.input);
    if (emb == nullptr && !session.empty())
      throw std::invalid_argument("encode_trajectory: sessions without embedder");
    run_step(&session, std::move(x), step_index++);
  }
  return traj;
}

BpttResult bptt_backward(const LstmCell& cell, const InputEmbedder* emb,
                         const Trajectory& traj,
                         const std::vector<Vec>& dh_per_step,
                         const ContextBackwardFn& ctx_backward) {
  if (!traj.heavy)
    throw std::logic_error("bptt_backward: trajectory has no forward cache");
  if (dh_per_step.size() != traj.steps.size())
    throw std::invalid_argument("bptt_backward: dh length mismatch");

  const int H = cell.dims.hidden;
  Vec dh_next = Vec::Zero(H);
  Vec dc_next = Vec::Zero(H);
  BpttResult result;

  for (int k = static_cast<int>(traj.steps.size()) - 1; k >= 0; --k) {
    const auto& step = traj.steps[k];
    Vec dh = dh_next;
    if (dh_per_step[k].size() != 0) dh += dh_per_step[k];

    const Vec& c_prev = (k == 0) ? traj.c0 : traj.steps[k - 1].cache.c;
    const Vec& h_prev = (k == 0) ? traj.h0 : traj.steps[k - 1].cache.h;

    LstmStepGrads g;
    lstm_step_backward(cell, step.cache, c_prev, dh, dc_next, g);

    if (step.session != nullptr) {
      if (emb) embed_session_backward(*emb, *step.session, g.dx);
    } else {
      result.d_content_x = g.dx;
    }
    if (cell.dims.context > 0 && ctx_backward)
      ctx_backward(k, h_prev, g.dctx, g.dh_prev);

    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }
  result.d_h0 = dh_next;
  return result;
}

}  // namespace lsic
