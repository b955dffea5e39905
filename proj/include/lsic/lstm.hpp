#ifndef LSIC_LSTM_HPP_
#define LSIC_LSTM_HPP_

#include "lsic/data.hpp"
#include "lsic/tensor.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace lsic {

// Single-layer LSTM over the concatenation [h_prev; x; ctx]. The context
// block is absent when context_dim == 0; a cell built that way is
// bit-identical to one that never had the slot.
struct LstmDims {
  int hidden = 10;
  int input = 15;
  int context = 0;
  int concat() const { return hidden + input + context; }
};

struct LstmCell {
  LstmDims dims;
  ParamTensor* W = nullptr;   // (3*hidden) x concat, gate pre-activations f,i,o
  ParamTensor* bW = nullptr;  // 3*hidden
  ParamTensor* V = nullptr;   // hidden x concat, candidate pre-activation
  ParamTensor* bV = nullptr;  // hidden

  // Registers the four tensors in `ps` under `<prefix>.W` etc.
  static LstmCell create(ParamSet& ps, const std::string& prefix, LstmDims dims);
};

struct LstmStepCache {
  Vec u;  // [h_prev; x; ctx]
  Vec f, i, o, l, c, tanh_c, h;
};

// gates = sigmoid(W u + bW), l = tanh(V u + bV),
// c = f .* c_prev + i .* l, h = o .* tanh(c)
void lstm_step(const LstmCell& cell, const Vec& h_prev, const Vec& c_prev,
               const Vec& x, const Vec* ctx, LstmStepCache& out);

struct LstmStepGrads {
  Vec dh_prev, dc_prev, dx, dctx;
};

// Reverse-mode step. dh/dc are the upstream gradients on h_t and c_t;
// parameter grads accumulate into the cell tensors.
void lstm_step_backward(const LstmCell& cell, const LstmStepCache& cache,
                        const Vec& c_prev, const Vec& dh, const Vec& dc,
                        LstmStepGrads& out);

// Averages counterpart embedding rows of one session, weighted by rating/5.
// An empty session embeds to the zero vector.
struct InputEmbedder {
  ParamTensor* table = nullptr;  // counterpart_count x input_dim
  int input_dim = 0;
};

Vec embed_session_input(const InputEmbedder& emb, const SessionVec& session);
void embed_session_backward(const InputEmbedder& emb, const SessionVec& session,
                            const Vec& dx);

// Dynamic per-step context hook (the attention mixture plugs in here).
// forward(step, h_prev) must return a context of the cell's context_dim.
using ContextForwardFn = std::function<Vec(int step, const Vec& h_prev)>;
// backward(step, h_prev, dctx, dh_prev): propagate into parameters owned by
// the provider and add any dL/dh_prev contribution.
using ContextBackwardFn =
    std::function<void(int step, const Vec& h_prev, const Vec& dctx, Vec& dh_prev)>;

struct Trajectory {
  Vec h0, c0;
  struct Step {
    const SessionVec* session = nullptr;  // nullptr => content injection step
    Vec x;
    Vec ctx;  // empty when the cell has no context slot
    LstmStepCache cache;
  };
  std::vector<Step> steps;
  int content_steps = 0;  // 0 or 1; content step precedes session steps
  bool heavy = false;     // caches retained for backward

  int session_count() const {
    return static_cast<int>(steps.size()) - content_steps;
  }
  // Hidden state after consuming session t.
  const Vec& state_at(int t) const;
  // Hidden state entering session t (t == 0 gives h0 or the content state).
  const Vec& state_entering(int t) const;
};

// Runs the cell over a session sequence. `content_x` (already projected to
// the input dimension) is consumed first when present. `h0_override` replaces
// the zero initial hidden state. When `heavy` is false the per-step caches
// are dropped and only h survives in each step cache.
Trajectory encode_trajectory(const LstmCell& cell, const InputEmbedder* emb,
                             const std::vector<SessionVec>& sessions,
                             const Vec* content_x,
                             const ContextForwardFn& ctx_fn,
                             const Vec* h0_override, bool heavy);

struct BpttResult {
  Vec d_h0;         // gradient on the initial hidden state
  Vec d_content_x;  // gradient on the content injection input (empty if none)
};

// Exact reverse-mode gradients through the whole trajectory. `dh_per_step`
// is indexed like `traj.steps`; empty vectors mean no upstream gradient at
// that step. Requires a heavy trajectory.
BpttResult bptt_backward(const LstmCell& cell, const InputEmbedder* emb,
                         const Trajectory& traj,
                         const std::vector<Vec>& dh_per_step,
                         const ContextBackwardFn& ctx_backward);

}  // namespace lsic

#endif  // LSIC_LSTM_HPP_
