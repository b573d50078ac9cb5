#include "schema_check.hpp"

#include "psq/error.hpp"

#include <cmath>
#include <set>

namespace psq::cli {

namespace {

#include "scenario_schema_text.inc"

const std::set<std::string> annotation_keys{"$schema", "$id", "$comment", "title", "description", "default",
                                            "examples"};
const std::set<std::string> value_keys{"type",    "enum",     "const",     "required",  "minItems",
                                       "maxItems", "minimum",  "maximum",   "exclusiveMinimum",
                                       "exclusiveMaximum",     "minLength", "maxLength", "$ref"};

void check_keywords(const json& s, const std::string& where) {
    if (s.is_boolean()) return;
    if (!s.is_object()) throw InvalidArgument("schema at " + where + " is neither an object nor a boolean");
    for (const auto& [k, v] : s.items()) {
        std::string at = where + "/" + k;
        if (annotation_keys.count(k) || value_keys.count(k)) continue;
        if (k == "properties" || k == "$defs") {
            for (const auto& [name, sub] : v.items()) check_keywords(sub, at + "/" + name);
        } else if (k == "items" || k == "additionalProperties" || k == "not" || k == "if" || k == "then" ||
                   k == "else") {
            check_keywords(v, at);
        } else if (k == "allOf" || k == "anyOf" || k == "oneOf") {
            for (std::size_t i = 0; i < v.size(); ++i) check_keywords(v[i], at + "/" + std::to_string(i));
        } else {
            throw InvalidArgument("schema keyword not supported by the validator: " + at);
        }
    }
}

std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") {
        if (v.is_number_integer()) return true;
        if (!v.is_number_float()) return false;
        double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d);
    }
    throw InvalidArgument("unknown schema type '" + t + "'");
}

std::size_t utf8_length(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

class Walker {
public:
    explicit Walker(const json& root) : root_(root) {}

    void check(const json& s, const json& v, const std::string& ptr, std::vector<std::string>& errs) const {
        if (s.is_boolean()) {
            if (!s.get<bool>()) errs.push_back(at(ptr) + "not allowed here");
            return;
        }
        if (auto it = s.find("$ref"); it != s.end()) {
            std::string ref = it->get<std::string>();
            if (ref.empty() || ref[0] != '#') throw InvalidArgument("only local $ref is supported: " + ref);
            check(root_.at(json::json_pointer(ref.substr(1))), v, ptr, errs);
        }
        if (auto it = s.find("type"); it != s.end()) {
            bool ok = false;
            std::string names;
            if (it->is_array()) {
                for (const auto& t : *it) {
                    ok = ok || has_type(v, t.get<std::string>());
                    names += (names.empty() ? "" : " or ") + t.get<std::string>();
                }
            } else {
                ok = has_type(v, it->get<std::string>());
                names = it->get<std::string>();
            }
            if (!ok) {
                errs.push_back(at(ptr) + "expected " + names + ", got " + v.dump());
                return;
            }
        }
        if (auto it = s.find("enum"); it != s.end()) {
            bool found = false;
            for (const auto& e : *it) found = found || e == v;
            if (!found) errs.push_back(at(ptr) + v.dump() + " is not one of " + it->dump());
        }
        if (auto it = s.find("const"); it != s.end() && *it != v)
            errs.push_back(at(ptr) + "expected " + it->dump() + ", got " + v.dump());
        if (v.is_number()) numeric(s, v.get<double>(), ptr, errs);
        if (v.is_string()) {
            std::size_t len = utf8_length(v.get<std::string>());
            if (auto it = s.find("minLength"); it != s.end() && len < it->get<std::size_t>())
                errs.push_back(at(ptr) + "shorter than " + it->dump() + " characters");
            if (auto it = s.find("maxLength"); it != s.end() && len > it->get<std::size_t>())
                errs.push_back(at(ptr) + "longer than " + it->dump() + " characters");
        }
        if (v.is_array()) array(s, v, ptr, errs);
        if (v.is_object()) object(s, v, ptr, errs);
        combinators(s, v, ptr, errs);
    }

private:
    static std::string at(const std::string& ptr) { return (ptr.empty() ? "/" : ptr) + ": "; }

    void numeric(const json& s, double d, const std::string& ptr, std::vector<std::string>& errs) const {
        if (auto it = s.find("minimum"); it != s.end() && d < it->get<double>())
            errs.push_back(at(ptr) + "must be >= " + it->dump());
        if (auto it = s.find("maximum"); it != s.end() && d > it->get<double>())
            errs.push_back(at(ptr) + "must be <= " + it->dump());
        if (auto it = s.find("exclusiveMinimum"); it != s.end() && d <= it->get<double>())
            errs.push_back(at(ptr) + "must be > " + it->dump());
        if (auto it = s.find("exclusiveMaximum"); it != s.end() && d >= it->get<double>())
            errs.push_back(at(ptr) + "must be < " + it->dump());
    }

    void array(const json& s, const json& v, const std::string& ptr, std::vector<std::string>& errs) const {
        if (auto it = s.find("minItems"); it != s.end() && v.size() < it->get<std::size_t>())
            errs.push_back(at(ptr) + "needs at least " + it->dump() + " items");
        if (auto it = s.find("maxItems"); it != s.end() && v.size() > it->get<std::size_t>())
            errs.push_back(at(ptr) + "allows at most " + it->dump() + " items");
        if (auto it = s.find("items"); it != s.end())
            for (std::size_t i = 0; i < v.size(); ++i) check(*it, v[i], ptr + "/" + std::to_string(i), errs);
    }

    void object(const json& s, const json& v, const std::string& ptr, std::vector<std::string>& errs) const {
        if (auto it = s.find("required"); it != s.end())
            for (const auto& k : *it)
                if (!v.contains(k.get<std::string>()))
                    errs.push_back(at(ptr) + "missing required property '" + k.get<std::string>() + "'");
        auto props = s.find("properties");
        auto extra = s.find("additionalProperties");
        for (const auto& [k, sub] : v.items()) {
            std::string child = ptr + "/" + escape(k);
            if (props != s.end() && props->contains(k)) {
                check((*props)[k], sub, child, errs);
            } else if (extra != s.end()) {
                if (extra->is_boolean() && !extra->get<bool>())
                    errs.push_back(at(child) + "unknown property '" + k + "'");
                else
                    check(*extra, sub, child, errs);
            }
        }
    }

    bool passes(const json& s, const json& v, const std::string& ptr) const {
        std::vector<std::string> scratch;
        check(s, v, ptr, scratch);
        return scratch.empty();
    }

    void combinators(const json& s, const json& v, const std::string& ptr, std::vector<std::string>& errs) const {
        if (auto it = s.find("allOf"); it != s.end())
            for (const auto& sub : *it) check(sub, v, ptr, errs);
        if (auto it = s.find("anyOf"); it != s.end()) {
            bool any = false;
            for (const auto& sub : *it) any = any || passes(sub, v, ptr);
            if (!any) errs.push_back(at(ptr) + "matches none of the anyOf alternatives");
        }
        if (auto it = s.find("oneOf"); it != s.end()) {
            int count = 0;
            for (const auto& sub : *it) count += passes(sub, v, ptr) ? 1 : 0;
            if (count != 1)
                errs.push_back(at(ptr) + "must match exactly one oneOf alternative, matches " +
                               std::to_string(count));
        }
        if (auto it = s.find("not"); it != s.end() && passes(*it, v, ptr))
            errs.push_back(at(ptr) + "matches a forbidden schema");
        if (auto it = s.find("if"); it != s.end()) {
            if (passes(*it, v, ptr)) {
                if (auto t = s.find("then"); t != s.end()) check(*t, v, ptr, errs);
            } else if (auto e = s.find("else"); e != s.end()) {
                check(*e, v, ptr, errs);
            }
        }
    }

    const json& root_;
};

} // namespace

SchemaValidator::SchemaValidator(json schema) : root_(std::move(schema)) { check_keywords(root_, ""); }

std::vector<std::string> SchemaValidator::validate(const json& doc) const {
    std::vector<std::string> errs;
    Walker(root_).check(root_, doc, "", errs);
    return errs;
}

const json& scenario_schema() {
    static const json schema = json::parse(scenario_schema_text);
    return schema;
}

const SchemaValidator& scenario_validator() {
    static const SchemaValidator v(scenario_schema());
    return v;
}

} // namespace psq::cli
