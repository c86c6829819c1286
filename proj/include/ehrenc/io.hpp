#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrenc/analyzer.hpp"
#include "ehrenc/audit.hpp"
#include "ehrenc/corpus.hpp"
#include "ehrenc/planner.hpp"
#include "ehrenc/privacy.hpp"
#include "ehrenc/serializer.hpp"
#include "ehrenc/vq.hpp"

namespace ehrenc {

using Json = nlohmann::ordered_json;

/// Missing keys keep the defaults of default_generator_config(); unknown keys
/// are rejected so typos do not silently change a run.
GeneratorConfig generator_config_from_json(const Json& j);
Json to_json(const GeneratorConfig& config);

Json to_json(const SerializerConfig& config);
SerializerConfig serializer_config_from_json(const Json& j);

/// One stream per line.
std::string streams_to_jsonl(const std::vector<TokenStream>& streams);
std::vector<TokenStream> streams_from_jsonl(std::string_view text);
Json to_json(const TokenStream& stream);
TokenStream stream_from_json(const Json& j);

Json to_json(const LayerOp& op);
LayerOp layer_op_from_json(const Json& j);
Json to_json(const LayerPlan& plan);
LayerPlan layer_plan_from_json(const Json& j);
Json to_json(const ShapeTrace& trace);
Json to_json(const CostModel& model);
CostModel cost_model_from_json(const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json to_json(const Codebook& codebook);
Codebook codebook_from_json(const Json& j);

Json to_json(const AuditReport& report);
Json to_json(const PrivacyReport& report);
/// threshold,precision,recall rows with a header line.
std::string privacy_csv(const PrivacyReport& report);

/// Everything needed to rerun a command. Deliberately free of timestamps so
/// identical runs produce identical manifests.
struct RunManifest {
    std::string command;
    Json config = Json::object();
    std::map<std::string, std::string> input_digests;  ///< path -> sha256
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
};

Json to_json(const RunManifest& manifest);

/// SHA-256 of a file, or of every regular file below a directory (sorted
/// relative paths hashed together with their contents).
std::string digest_path(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace ehrenc
