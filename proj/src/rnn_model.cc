#include "relclass/rnn_model.h"

#include "relclass/config_map.h"
#include "relclass/numerics.h"

namespace relclass {
namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void add_into(std::vector<double>& a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

const char* to_string(RnnVariant v) {
  switch (v) {
    case RnnVariant::kUni: return "uni";
    case RnnVariant::kBi: return "bi";
    case RnnVariant::kConnectionist: return "connectionist";
  }
  return "uni";
}

RnnVariant rnn_variant_from_string(const std::string& s) {
  if (s == "uni") return RnnVariant::kUni;
  if (s == "bi") return RnnVariant::kBi;
  if (s == "connectionist") return RnnVariant::kConnectionist;
  throw std::invalid_argument("unknown RNN variant '" + s + "'");
}

void RnnConfig::validate() const {
  if (word_dim == 0) throw std::invalid_argument("word_dim must be positive");
  if (hidden == 0) throw std::invalid_argument("hidden width must be positive");
  if (!(relu_cap > 0.0)) throw std::invalid_argument("capped ReLU cap must be positive");
  position.validate();
}

ConfigMap RnnConfig::to_map() const {
  return {
      {"variant", to_string(variant)},
      {"position_variant", to_string(position.variant)},
      {"pos_dim", std::to_string(position.pos_dim)},
      {"position_clip", std::to_string(position.clip)},
      {"word_dim", std::to_string(word_dim)},
      {"hidden", std::to_string(hidden)},
      {"objective", to_string(objective)},
      {"relu_cap", format_double(relu_cap)},
      {"bptt_truncation", std::to_string(bptt_truncation)},
  };
}

RnnConfig RnnConfig::from_map(const ConfigMap& m) {
  RnnConfig c;
  c.variant = rnn_variant_from_string(require_key(m, "variant"));
  c.position.variant = position_variant_from_string(require_key(m, "position_variant"));
  c.position.pos_dim = get_size(m, "pos_dim");
  c.position.clip = static_cast<int>(get_int(m, "position_clip"));
  c.word_dim = get_size(m, "word_dim");
  c.hidden = get_size(m, "hidden");
  c.objective = objective_from_string(require_key(m, "objective"));
  c.relu_cap = get_double(m, "relu_cap");
  c.bptt_truncation = get_size(m, "bptt_truncation");
  c.validate();
  return c;
}

RnnModel::RnnModel(RnnConfig config, Vocabulary vocab, std::mt19937_64& rng,
                   const PretrainedEmbeddings* pretrained)
    : config_(std::move(config)), vocab_(std::make_shared<const Vocabulary>(std::move(vocab))) {
  config_.validate();
  space_ = add_embedding_tables(params_, *vocab_, config_.word_dim, config_.position, rng,
                                pretrained);
  add_layers(rng);
}

RnnModel::RnnModel(RnnConfig config, Vocabulary vocab, ParameterSet params)
    : config_(std::move(config)),
      vocab_(std::make_shared<const Vocabulary>(std::move(vocab))),
      params_(std::move(params)) {
  config_.validate();
  space_ = bind_embedding_tables(params_, *vocab_, config_.position);
  require_shape(space_.word_dim == config_.word_dim, "checkpoint word table width mismatch");
  bind_layers();
}

RnnModel::RnnModel(const RnnModel& other)
    : config_(other.config_),
      vocab_(other.vocab_),
      params_(other.params_),
      space_(other.space_),
      fwd_in_(other.fwd_in_),
      fwd_rec_(other.fwd_rec_),
      bwd_in_(other.bwd_in_),
      bwd_rec_(other.bwd_rec_),
      comb_rec_(other.comb_rec_),
      scorer_(other.scorer_),
      scorer_bias_(other.scorer_bias_) {}

void RnnModel::add_layers(std::mt19937_64& rng) {
  const std::size_t h = config_.hidden;
  const std::size_t in = input_width();
  params_.add("forward.input", ParamKind::kWeight, uniform_matrix(h, in, 0.1, rng));
  params_.add("forward.recurrent", ParamKind::kWeight, uniform_matrix(h, h, 0.1, rng));
  if (config_.variant != RnnVariant::kUni) {
    params_.add("backward.input", ParamKind::kWeight, uniform_matrix(h, in, 0.1, rng));
    params_.add("backward.recurrent", ParamKind::kWeight, uniform_matrix(h, h, 0.1, rng));
  }
  if (config_.variant == RnnVariant::kConnectionist) {
    params_.add("combined.recurrent", ParamKind::kWeight, uniform_matrix(h, h, 0.1, rng));
  }
  const std::size_t k = num_scores(config_.objective);
  params_.add("scorer.weights", ParamKind::kWeight, uniform_matrix(k, h, 0.1, rng));
  params_.add("scorer.bias", ParamKind::kBias, Matrix(1, k));
  bind_layers();
}

void RnnModel::bind_layers() {
  const std::size_t h = config_.hidden;
  const std::size_t in = input_width();
  auto bind = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    const std::size_t i = params_.index_of(name);
    require_shape(params_[i].value.rows() == rows && params_[i].value.cols() == cols,
                  name + " has shape " + shape_string(params_[i].value) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    return i;
  };
  fwd_in_ = bind("forward.input", h, in);
  fwd_rec_ = bind("forward.recurrent", h, h);
  bwd_in_.reset();
  bwd_rec_.reset();
  comb_rec_.reset();
  if (config_.variant != RnnVariant::kUni) {
    bwd_in_ = bind("backward.input", h, in);
    bwd_rec_ = bind("backward.recurrent", h, h);
  }
  if (config_.variant == RnnVariant::kConnectionist) {
    comb_rec_ = bind("combined.recurrent", h, h);
  }
  scorer_ = bind("scorer.weights", num_scores(config_.objective), h);
  scorer_bias_ = bind("scorer.bias", 1, num_scores(config_.objective));
}

EncodedInput RnnModel::encode(const LabeledSentence& sentence) const {
  return encode_rnn_input(sentence, space_, params_);
}

std::vector<double> RnnModel::forward(const LabeledSentence& sentence, Cache* cache) const {
  return forward_encoded(encode(sentence), cache);
}

void RnnModel::scan(const Matrix& x, std::size_t input, std::size_t recurrent,
                    std::vector<std::vector<double>>& pre,
                    std::vector<std::vector<double>>& out) const {
  const Matrix& u = params_[input].value;
  const Matrix& w = params_[recurrent].value;
  std::vector<double> state(config_.hidden, 0.0);
  pre.clear();
  out.clear();
  for (std::size_t s = 0; s < x.rows(); ++s) {
    pre.push_back(add(affine(u, x.row(s)), affine(w, state)));
    state = capped_relu(pre.back(), config_.relu_cap);
    out.push_back(state);
  }
}

std::vector<double> RnnModel::forward_encoded(EncodedInput input, Cache* cache) const {
  const Matrix& x = input.values;
  const std::size_t n = x.rows();
  if (n == 0) throw ShapeError("RNN forward on an empty sequence");
  require_shape(x.cols() == input_width(), "RNN input has width " + std::to_string(x.cols()) +
                                               ", expected " + std::to_string(input_width()));
  const double cap = config_.relu_cap;
  Cache local;
  Cache& c = cache ? *cache : local;
  scan(x, fwd_in_, fwd_rec_, c.fwd_pre, c.fwd);
  c.bwd_pre.clear();
  c.bwd.clear();
  c.comb_pre.clear();
  c.comb.clear();

  std::vector<double> rep;
  switch (config_.variant) {
    case RnnVariant::kUni:
      rep = c.fwd[n - 1];
      break;
    case RnnVariant::kBi:
      scan(x, *bwd_in_, *bwd_rec_, c.bwd_pre, c.bwd);
      // hb_n is the first backward scan state.
      c.comb_pre.push_back(add(c.bwd[0], c.fwd[n - 1]));
      c.comb.push_back(capped_relu(c.comb_pre.back(), cap));
      rep = c.comb.back();
      break;
    case RnnVariant::kConnectionist: {
      scan(x, *bwd_in_, *bwd_rec_, c.bwd_pre, c.bwd);
      const Matrix& hmat = params_[*comb_rec_].value;
      std::vector<double> state(config_.hidden, 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        c.comb_pre.push_back(add(add(c.bwd[n - 1 - t], c.fwd[t]), affine(hmat, state)));
        state = capped_relu(c.comb_pre.back(), cap);
        c.comb.push_back(state);
      }
      rep = state;
      break;
    }
  }
  std::vector<double> scores =
      affine(params_[scorer_].value, rep, params_[scorer_bias_].value.row(0));
  c.version = version_;
  c.input = std::move(input);
  c.representation = std::move(rep);
  c.scores = scores;
  return scores;
}

void RnnModel::scan_backward(const Matrix& x, std::size_t input, std::size_t recurrent,
                             const std::vector<std::vector<double>>& pre,
                             const std::vector<std::vector<double>>& out,
                             std::vector<std::vector<double>> dstate, GradientSet& grads,
                             Matrix& dx) const {
  const Matrix& u = params_[input].value;
  const Matrix& w = params_[recurrent].value;
  const std::size_t n = x.rows();
  const std::size_t k = config_.bptt_truncation;
  std::vector<double> carry(config_.hidden, 0.0);
  for (std::size_t s = n; s-- > 0;) {
    add_into(dstate[s], carry);
    const auto dpre = capped_relu_backward(pre[s], dstate[s], config_.relu_cap);
    affine_backward_accumulate(u, x.row(s), dpre, grads.dense(input), dx.row(s));
    std::fill(carry.begin(), carry.end(), 0.0);
    if (s > 0) {
      const bool within = k == 0 || n - s < k;
      affine_backward_accumulate(w, out[s - 1], dpre, grads.dense(recurrent),
                                 within ? std::span<double>(carry) : std::span<double>());
    }
  }
}

void RnnModel::backward(const Cache& cache, std::span<const double> dscores,
                        GradientSet& grads, double scale) const {
  if (cache.version != version_ || cache.fwd.empty()) {
    throw StaleCacheError("RNN backward called with a cache from an earlier forward pass");
  }
  require_shape(dscores.size() == num_scores(config_.objective), "dscores length mismatch");
  const Matrix& x = cache.input.values;
  const std::size_t n = x.rows();
  const std::size_t h = config_.hidden;
  const double cap = config_.relu_cap;
  const std::size_t k = config_.bptt_truncation;

  std::vector<double> dy(dscores.begin(), dscores.end());
  for (double& v : dy) v *= scale;
  std::vector<double> drep(h, 0.0);
  affine_backward_accumulate(params_[scorer_].value, cache.representation, dy,
                             grads.dense(scorer_), drep);
  auto db = grads.dense(scorer_bias_).row(0);
  for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];

  std::vector<std::vector<double>> dfwd(n, std::vector<double>(h, 0.0));
  std::vector<std::vector<double>> dbwd;
  if (config_.variant != RnnVariant::kUni) dbwd.assign(n, std::vector<double>(h, 0.0));

  switch (config_.variant) {
    case RnnVariant::kUni:
      add_into(dfwd[n - 1], drep);
      break;
    case RnnVariant::kBi: {
      const auto dpre = capped_relu_backward(cache.comb_pre[0], drep, cap);
      add_into(dfwd[n - 1], dpre);
      add_into(dbwd[0], dpre);
      break;
    }
    case RnnVariant::kConnectionist: {
      const Matrix& hmat = params_[*comb_rec_].value;
      std::vector<double> dh = drep;
      for (std::size_t t = n; t-- > 0;) {
        const auto dpre = capped_relu_backward(cache.comb_pre[t], dh, cap);
        add_into(dfwd[t], dpre);
        add_into(dbwd[n - 1 - t], dpre);
        std::fill(dh.begin(), dh.end(), 0.0);
        if (t > 0) {
          const bool within = k == 0 || n - t < k;
          affine_backward_accumulate(hmat, cache.comb[t - 1], dpre, grads.dense(*comb_rec_),
                                     within ? std::span<double>(dh) : std::span<double>());
        }
      }
      break;
    }
  }

  Matrix dx(n, x.cols());
  scan_backward(x, fwd_in_, fwd_rec_, cache.fwd_pre, cache.fwd, std::move(dfwd), grads, dx);
  if (config_.variant != RnnVariant::kUni) {
    scan_backward(x, *bwd_in_, *bwd_rec_, cache.bwd_pre, cache.bwd, std::move(dbwd), grads, dx);
  }
  scatter_rnn_gradient(cache.input, dx, space_, grads);
}

double RnnModel::accumulate_gradient(const LabeledSentence& sentence, const LossFn& loss,
                                     GradientSet& grads, double scale) const {
  Cache cache;
  const auto scores = forward(sentence, &cache);
  LossResult r = loss(scores, sentence);
  backward(cache, r.dscores, grads, scale);
  return r.loss;
}

}  // namespace relclass
