#ifndef RELKIT_CONFIG_H_
#define RELKIT_CONFIG_H_

#include "json.hpp"

#include "relkit/eval.h"
#include "relkit/retrieval.h"
#include "relkit/synthetic.h"
#include "relkit/training.h"

namespace relkit {

using Json = nlohmann::ordered_json;

std::string_view likelihood_name(GtLikelihood g);
GtLikelihood parse_likelihood(std::string_view name);
std::string_view direction_name(DescentDirection d);
DescentDirection parse_direction(std::string_view name);

// Every field, in declaration order. The readers start from the defaults,
// accept any subset of keys and throw InvalidArgument on unknown keys or
// values of the wrong type.
Json to_json(const SynthConfig &c);
Json to_json(const TrainingConfig &c);
Json to_json(const EvalOptions &c);
Json to_json(const DescriptorOptions &c);
SynthConfig synth_config_from_json(const Json &j);
TrainingConfig training_config_from_json(const Json &j);
EvalOptions eval_options_from_json(const Json &j);
DescriptorOptions descriptor_options_from_json(const Json &j);

// Reads a JSON document; IoError when unreadable, ParseError when malformed.
Json read_json_file(const std::string &path);
void write_text_file(const std::string &path, std::string_view text);

}  // namespace relkit

#endif  // RELKIT_CONFIG_H_
