// net/mlp.cc

#include "net/mlp.h"

#include "util/errors.h"

namespace demist {

void LossSpec::validate() const {
  if (kind == Kind::kMultiFixed && (lambda1 < 0 || lambda2 < 0))
    throw UsageError("loss weights must be non-negative");
}

std::string LossSpec::name() const {
  switch (kind) {
    case Kind::kSingle: return "single";
    case Kind::kMultiFixed: return "multi-fixed";
    case Kind::kMultiAdaptive: return "multi-adaptive";
  }
  return "?";
}

LossSpec LossSpec::parse(const std::string& name, double lambda1, double lambda2) {
  LossSpec spec;
  spec.lambda1 = lambda1;
  spec.lambda2 = lambda2;
  if (name == "single") spec.kind = Kind::kSingle;
  else if (name == "multi-fixed") spec.kind = Kind::kMultiFixed;
  else if (name == "multi-adaptive") spec.kind = Kind::kMultiAdaptive;
  else throw UsageError("unknown loss '" + name +
                        "' (expected single, multi-fixed, or multi-adaptive)");
  spec.validate();
  return spec;
}

void Architecture::validate() const {
  if (shape < 'a' || shape > 'e')
    throw UsageError(std::string("unknown network shape '") + shape +
                     "' (expected a..e)");
  if (input_dim <= 0 || output_dim <= 0 || hidden_units <= 0)
    throw UsageError("network dimensions must be positive");
}

Activation primary_activation(TargetKind kind) {
  return bounded_output(kind) ? Activation::kSigmoid : Activation::kIdentity;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

}  // namespace demist
