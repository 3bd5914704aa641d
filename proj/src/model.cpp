#include "vibgsl/model.hpp"

#include <algorithm>
#include <cmath>

#include "vibgsl/errors.hpp"
#include "vibgsl/ops.hpp"
#include "vibgsl/optim.hpp"

namespace vibgsl {

Model Model::init(const TrainConfig& config, std::size_t feature_dim, int num_classes, std::uint64_t seed) {
  config.validate();
  if (feature_dim == 0 || num_classes < 1) throw ParameterError("model needs feature_dim >= 1 and >= 1 class");
  std::mt19937_64 rng(seed);
  Model m;
  m.kind = config.model;
  const std::size_t k = config.bottleneck;
  if (m.kind == ModelKind::vib_gsl) {
    m.generator.mask = FeatureMaskParams::init(feature_dim);
    m.generator.mask.temperature = config.mask_temperature;
    m.generator.structure =
        StructureLearnerParams::init(feature_dim, config.structure_hidden, config.structure_embed, rng);
    m.generator.structure.temperature = config.temperature;
    m.generator.structure.threshold = config.threshold;
    m.generator.eval_adjacency = config.eval_adjacency;
    m.encoder = EncoderParams::init(config.backbone, feature_dim, config.hidden, 2 * k, config.layers, rng);
  } else {
    m.encoder = EncoderParams::init(config.backbone, feature_dim, config.hidden, k, config.layers, rng);
  }
  m.encoder.gin_eps = config.gin_eps;
  m.classifier = ClassifierParams::init(k, config.classifier_hidden, static_cast<std::size_t>(num_classes), rng);
  return m;
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  if (kind == ModelKind::vib_gsl) out = generator.parameters();
  for (Tensor* p : encoder.parameters()) out.push_back(p);
  for (Tensor* p : classifier.parameters()) out.push_back(p);
  return out;
}

ForwardNoise draw_forward_noise(const Model& model, std::size_t num_nodes, std::mt19937_64& rng) {
  ForwardNoise noise;
  if (model.kind == ModelKind::vib_gsl) {
    noise.graph = GeneratorNoise::draw(num_nodes, rng);
    noise.eps = draw_gaussian(model.representation_dim(), rng);
  }
  return noise;
}

ForwardVars forward(Tape& tape, Model& model, const Graph& g, const ForwardNoise& noise, double beta, bool train) {
  if (g.feature_dim() != model.encoder.in_dim()) {
    throw DimensionError("graph feature width " + std::to_string(g.feature_dim()) + " vs model input " +
                         std::to_string(model.encoder.in_dim()));
  }
  if (!g.label) throw ContractError("forward needs a labelled graph");
  ForwardVars out;
  if (model.kind == ModelKind::vib_gsl) {
    out.ib = generate(tape, g, model.generator, noise.graph, train);
    out.gauss = encode(tape, out.ib.features, out.ib.adjacency, model.encoder);
    out.z = train ? reparameterize(tape, out.gauss, noise.eps) : out.gauss.mu;
    out.logits = classify(tape, out.z, model.classifier);
    out.loss = vib_loss(tape, out.gauss, out.logits, *g.label, beta);
  } else {
    if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
    out.z = encode_pooled(tape, tape.constant(g.features), tape.constant(g.adjacency), model.encoder);
    out.logits = classify(tape, out.z, model.classifier);
    out.loss.ce = cross_entropy(tape, out.logits, *g.label);
    out.loss.kl = tape.constant(Tensor::scalar(0.0));
    out.loss.total = add(tape, out.loss.ce, scale(tape, out.loss.kl, beta));
  }
  return out;
}

int argmax(std::span<const double> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

int predict(Model& model, const Graph& g, std::uint64_t eval_seed) {
  std::mt19937_64 rng(eval_seed);
  const auto noise = draw_forward_noise(model, g.num_nodes(), rng);
  Tape tape;
  Graph labelled = g;
  if (!labelled.label) labelled.label = 0;
  const auto vars = forward(tape, model, labelled, noise, 0.0, false);
  return argmax(tape.value(vars.logits).data());
}

IBGraph export_ib_graph(Model& model, const Graph& g, std::uint64_t eval_seed) {
  if (model.kind != ModelKind::vib_gsl) throw ContractError("only vib_gsl models produce an IB-Graph");
  std::mt19937_64 rng(eval_seed);
  return generate(g, model.generator, rng, false);
}

namespace {

double loss_value(Model& model, const Graph& g, const ForwardNoise& noise, double beta) {
  Tape tape;
  const auto vars = forward(tape, model, g, noise, beta, true);
  return tape.value(vars.loss.total).item();
}

GradcheckResult check_one_model(std::string name, const TrainConfig& config, std::uint64_t seed,
                                const GradcheckOptions& options) {
  constexpr std::size_t kNodes = 5;
  constexpr std::size_t kFeatures = 4;
  constexpr double kBoundaryGap = 1e-3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Graph g{Tensor::matrix(kNodes, kFeatures), Tensor::matrix(kNodes, kNodes), 1};
  for (double& x : g.features.data()) x = normal(rng);
  for (std::size_t v = 1; v < kNodes; ++v) g.adjacency(v - 1, v) = g.adjacency(v, v - 1) = 1.0;

  // Redraw parameters and noise until every relu input and relaxed edge sits
  // at least kBoundaryGap away from its kink.
  Model model;
  ForwardNoise noise;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) throw ContractError("gradcheck: could not keep activations away from kinks");
    model = Model::init(config, kFeatures, 2, mix_seed(seed, 1 + static_cast<std::uint64_t>(attempt)));
    if (model.kind == ModelKind::vib_gsl) {
      for (double& x : model.generator.mask.mask_logits.data()) x = normal(rng);
    }
    noise = draw_forward_noise(model, kNodes, rng);
    Tape tape;
    const auto vars = forward(tape, model, g, noise, config.beta, true);
    bool clear = true;
    for (const auto& rec : tape.records()) {
      if (rec.op != "relu") continue;
      for (double x : tape.value(Var{rec.inputs[0]}).data()) clear = clear && std::abs(x) >= kBoundaryGap;
    }
    if (model.kind == ModelKind::vib_gsl) {
      const auto& relaxed = tape.value(vars.ib.relaxed);
      for (std::size_t u = 0; u < kNodes; ++u) {
        for (std::size_t v = 0; v < kNodes; ++v) {
          if (u != v && std::abs(relaxed(u, v) - config.threshold) < kBoundaryGap) clear = false;
        }
      }
    }
    if (clear) break;
  }
  const auto params = model.parameters();
  for (Tensor* p : params) {
    if (!p->requires_grad()) p->set_requires_grad(true);
  }

  zero_grads(params);
  {
    Tape tape;
    const auto vars = forward(tape, model, g, noise, config.beta, true);
    tape.backward(vars.loss.total);
  }

  GradcheckResult result;
  result.name = std::move(name);
  const double h = options.step;
  for (Tensor* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double x0 = (*p)[i];
      (*p)[i] = x0 + h;
      const double up = loss_value(model, g, noise, config.beta);
      (*p)[i] = x0 - h;
      const double down = loss_value(model, g, noise, config.beta);
      (*p)[i] = x0;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad()[i];
      const double err = gradient_error(analytic, numeric, options);
      result.max_error = std::max(result.max_error, err);
      ++result.entries;
      if (!(err < options.tolerance)) ++result.failures;
    }
  }
  return result;
}

}  // namespace

std::vector<GradcheckResult> check_model_gradients(std::uint64_t seed, const GradcheckOptions& options) {
  TrainConfig base;
  base.bottleneck = 3;
  base.hidden = 6;
  base.classifier_hidden = 5;
  base.structure_hidden = 6;
  base.structure_embed = 4;
  base.beta = 0.5;

  std::vector<GradcheckResult> out;
  std::uint64_t stream = 0;
  for (Backbone backbone : {Backbone::gcn, Backbone::gin}) {
    for (double t : {0.1, 0.5}) {
      TrainConfig c = base;
      c.backbone = backbone;
      c.temperature = t;
      out.push_back(check_one_model("model_" + to_string(backbone) + "_t" + (t == 0.1 ? "0.1" : "0.5"), c,
                                    mix_seed(seed, stream++), options));
    }
    TrainConfig raw = base;
    raw.model = ModelKind::raw_gnn;
    raw.backbone = backbone;
    out.push_back(check_one_model("raw_" + to_string(backbone), raw, mix_seed(seed, stream++), options));
  }
  return out;
}

}  // namespace vibgsl
