#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace psq::cli {

using json = nlohmann::json;

// Validator for the JSON Schema (2020-12) keywords the scenario schema uses:
// type, enum, const, required, properties, additionalProperties, items,
// minItems, maxItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum,
// minLength, maxLength, allOf, anyOf, oneOf, not, if/then/else and local
// "#/..." $refs. Annotations are ignored; any other keyword throws
// InvalidArgument when the schema is loaded.
class SchemaValidator {
public:
    explicit SchemaValidator(json schema);

    // One message per violation, each prefixed by the JSON pointer of the
    // offending value ("/grid/nx: ...").
    std::vector<std::string> validate(const json& doc) const;

private:
    json root_;
};

// The published scenario schema, embedded at build time.
const json& scenario_schema();
const SchemaValidator& scenario_validator();

} // namespace psq::cli
