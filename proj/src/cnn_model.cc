#include "relclass/cnn_model.h"

#include <algorithm>

#include "relclass/config_map.h"

namespace relclass {
namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

std::string stack_prefix(std::size_t stack, std::size_t window) {
  return "stack" + std::to_string(stack) + ".window" + std::to_string(window);
}

}  // namespace

const char* to_string(ContextMode m) {
  return m == ContextMode::kExtended ? "extended" : "middle";
}

ContextMode context_mode_from_string(const std::string& s) {
  if (s == "extended") return ContextMode::kExtended;
  if (s == "middle") return ContextMode::kMiddleOnly;
  throw std::invalid_argument("unknown context mode '" + s + "'");
}

void CnnConfig::validate() const {
  if (window_sizes.empty()) throw std::invalid_argument("CNN needs at least one window size");
  for (auto w : window_sizes) {
    if (w == 0) throw std::invalid_argument("CNN window sizes must be positive");
  }
  if (feature_maps_per_window == 0) throw std::invalid_argument("CNN needs feature maps");
  if (word_dim == 0) throw std::invalid_argument("word_dim must be positive");
  if (position.variant != PositionVariant::kEmbeddings &&
      position.variant != PositionVariant::kNone) {
    throw std::invalid_argument(
        std::string("CNN supports position variants 'embeddings' and 'none', not '") +
        to_string(position.variant) + "'");
  }
  position.validate();
}

std::size_t CnnConfig::max_window() const {
  return *std::max_element(window_sizes.begin(), window_sizes.end());
}

ConfigMap CnnConfig::to_map() const {
  return {
      {"context_mode", to_string(context_mode)},
      {"window_sizes", join_sizes(window_sizes)},
      {"feature_maps_per_window", std::to_string(feature_maps_per_window)},
      {"word_dim", std::to_string(word_dim)},
      {"position_variant", to_string(position.variant)},
      {"pos_dim", std::to_string(position.pos_dim)},
      {"position_clip", std::to_string(position.clip)},
      {"objective", to_string(objective)},
  };
}

CnnConfig CnnConfig::from_map(const ConfigMap& m) {
  CnnConfig c;
  c.context_mode = context_mode_from_string(require_key(m, "context_mode"));
  c.window_sizes = parse_size_list(require_key(m, "window_sizes"));
  c.feature_maps_per_window = get_size(m, "feature_maps_per_window");
  c.word_dim = get_size(m, "word_dim");
  c.position.variant = position_variant_from_string(require_key(m, "position_variant"));
  c.position.pos_dim = get_size(m, "pos_dim");
  c.position.clip = static_cast<int>(get_int(m, "position_clip"));
  c.objective = objective_from_string(require_key(m, "objective"));
  c.validate();
  return c;
}

CnnModel::CnnModel(CnnConfig config, Vocabulary vocab, std::mt19937_64& rng,
                   const PretrainedEmbeddings* pretrained)
    : config_(std::move(config)), vocab_(std::make_shared<const Vocabulary>(std::move(vocab))) {
  config_.validate();
  space_ = add_embedding_tables(params_, *vocab_, config_.word_dim, config_.position, rng,
                                pretrained);
  add_layers(&rng);
}

CnnModel::CnnModel(CnnConfig config, Vocabulary vocab, ParameterSet params)
    : config_(std::move(config)),
      vocab_(std::make_shared<const Vocabulary>(std::move(vocab))),
      params_(std::move(params)) {
  config_.validate();
  space_ = bind_embedding_tables(params_, *vocab_, config_.position);
  require_shape(space_.word_dim == config_.word_dim, "checkpoint word table width mismatch");
  bind_layers();
}

CnnModel::CnnModel(const CnnModel& other)
    : config_(other.config_),
      vocab_(other.vocab_),
      params_(other.params_),
      space_(other.space_),
      filters_(other.filters_),
      filter_biases_(other.filter_biases_),
      scorer_(other.scorer_),
      scorer_bias_(other.scorer_bias_) {}

void CnnModel::add_layers(std::mt19937_64* rng) {
  const std::size_t width = space_.token_width();
  for (std::size_t s = 0; s < config_.stacks(); ++s) {
    for (std::size_t w : config_.window_sizes) {
      const std::string prefix = stack_prefix(s, w);
      params_.add(prefix + ".filters", ParamKind::kWeight,
                  uniform_matrix(config_.feature_maps_per_window, w * width, 0.1, *rng));
      params_.add(prefix + ".bias", ParamKind::kBias,
                  Matrix(1, config_.feature_maps_per_window));
    }
  }
  params_.add("scorer.weights", ParamKind::kWeight,
              uniform_matrix(num_scores(config_.objective), config_.representation_width(), 0.1,
                             *rng));
  params_.add("scorer.bias", ParamKind::kBias, Matrix(1, num_scores(config_.objective)));
  bind_layers();
}

void CnnModel::bind_layers() {
  const std::size_t width = space_.token_width();
  filters_.clear();
  filter_biases_.clear();
  for (std::size_t s = 0; s < config_.stacks(); ++s) {
    for (std::size_t w : config_.window_sizes) {
      const std::string prefix = stack_prefix(s, w);
      const std::size_t f = params_.index_of(prefix + ".filters");
      const std::size_t b = params_.index_of(prefix + ".bias");
      require_shape(params_[f].value.rows() == config_.feature_maps_per_window &&
                        params_[f].value.cols() == w * width,
                    prefix + ".filters has shape " + shape_string(params_[f].value));
      require_shape(params_[b].value.cols() == config_.feature_maps_per_window,
                    prefix + ".bias has the wrong width");
      filters_.push_back(f);
      filter_biases_.push_back(b);
    }
  }
  scorer_ = params_.index_of("scorer.weights");
  scorer_bias_ = params_.index_of("scorer.bias");
  require_shape(params_[scorer_].value.rows() == num_scores(config_.objective) &&
                    params_[scorer_].value.cols() == config_.representation_width(),
                "scorer has shape " + shape_string(params_[scorer_].value));
}

std::size_t CnnModel::filter_index(std::size_t stack, std::size_t window_slot) const {
  return filters_.at(stack * config_.window_sizes.size() + window_slot);
}

std::size_t CnnModel::filter_bias_index(std::size_t stack, std::size_t window_slot) const {
  return filter_biases_.at(stack * config_.window_sizes.size() + window_slot);
}

std::vector<EncodedInput> CnnModel::encode(const LabeledSentence& sentence) const {
  const ContextViews views = split_contexts(sentence);
  const std::size_t mw = config_.max_window();
  std::vector<EncodedInput> inputs;
  if (config_.context_mode == ContextMode::kExtended) {
    inputs.push_back(encode_cnn_input(sentence, views.extended_1, space_, params_, mw));
    inputs.push_back(encode_cnn_input(sentence, views.extended_2, space_, params_, mw));
  } else {
    inputs.push_back(encode_cnn_input(sentence, views.middle, space_, params_, mw));
  }
  return inputs;
}

std::vector<double> CnnModel::forward(const LabeledSentence& sentence, Cache* cache) const {
  return forward_encoded(encode(sentence), cache);
}

std::vector<double> CnnModel::forward_encoded(std::vector<EncodedInput> inputs,
                                              Cache* cache) const {
  require_shape(inputs.size() == config_.stacks(),
                "expected " + std::to_string(config_.stacks()) + " encoded inputs");
  const std::size_t maps = config_.feature_maps_per_window;
  std::vector<double> pooled;
  pooled.reserve(config_.representation_width());
  std::vector<StackCache> stacks(inputs.size());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    StackCache& sc = stacks[s];
    for (std::size_t k = 0; k < config_.window_sizes.size(); ++k) {
      const Matrix& filters = params_[filter_index(s, k)].value;
      const Matrix& bias = params_[filter_bias_index(s, k)].value;
      Matrix fmap = conv_over_time(inputs[s].values, filters, bias.row(0),
                                   config_.window_sizes[k]);
      PoolResult pool = max_pool_over_time(fmap);
      require_shape(pool.values.size() == maps, "pooled width mismatch");
      pooled.insert(pooled.end(), pool.values.begin(), pool.values.end());
      if (cache) {
        sc.feature_maps.push_back(std::move(fmap));
        sc.argmax.push_back(std::move(pool.argmax));
      }
    }
    if (cache) sc.input = std::move(inputs[s]);
  }
  std::vector<double> rep = tanh_act(pooled);
  std::vector<double> scores =
      affine(params_[scorer_].value, rep, params_[scorer_bias_].value.row(0));
  if (cache) {
    cache->version = version_;
    cache->stacks = std::move(stacks);
    cache->pooled = std::move(pooled);
    cache->representation = std::move(rep);
    cache->scores = scores;
  }
  return scores;
}

void CnnModel::backward(const Cache& cache, std::span<const double> dscores,
                        GradientSet& grads, double scale) const {
  if (cache.version != version_ || cache.stacks.size() != config_.stacks()) {
    throw StaleCacheError("CNN backward called with a cache from an earlier forward pass");
  }
  require_shape(dscores.size() == num_scores(config_.objective), "dscores length mismatch");
  std::vector<double> dy(dscores.begin(), dscores.end());
  for (double& v : dy) v *= scale;

  const Matrix& scorer = params_[scorer_].value;
  std::vector<double> drep(scorer.cols(), 0.0);
  affine_backward_accumulate(scorer, cache.representation, dy, grads.dense(scorer_), drep);
  auto db = grads.dense(scorer_bias_).row(0);
  for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];

  const std::vector<double> dpooled = tanh_backward(cache.representation, drep);
  const std::size_t maps = config_.feature_maps_per_window;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < cache.stacks.size(); ++s) {
    const StackCache& sc = cache.stacks[s];
    Matrix dinput(sc.input.values.rows(), sc.input.values.cols());
    for (std::size_t k = 0; k < config_.window_sizes.size(); ++k) {
      std::span<const double> dslice(dpooled.data() + offset, maps);
      offset += maps;
      const Matrix dmap = max_pool_backward(dslice, sc.argmax[k], sc.feature_maps[k].cols());
      const std::size_t f = filter_index(s, k);
      conv_over_time_backward(sc.input.values, params_[f].value, config_.window_sizes[k], dmap,
                              grads.dense(f), grads.dense(filter_bias_index(s, k)).row(0),
                              &dinput);
    }
    scatter_cnn_gradient(sc.input, dinput, space_, grads);
  }
}

double CnnModel::accumulate_gradient(const LabeledSentence& sentence, const LossFn& loss,
                                     GradientSet& grads, double scale) const {
  Cache cache;
  const auto scores = forward(sentence, &cache);
  LossResult r = loss(scores, sentence);
  backward(cache, r.dscores, grads, scale);
  return r.loss;
}

}  // namespace relclass
