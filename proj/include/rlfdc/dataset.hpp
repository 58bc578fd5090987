#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlfdc {

using TestId = int;
using ElementId = int;
using MethodId = int;

// One byte per element; values are strictly 0 or 1.
using BitVec = std::vector<std::uint8_t>;

enum class Outcome { Pass, Fail, Unknown };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    default: return "unknown";
  }
}

inline Outcome outcome_from_name(const std::string& s) {
  if (s == "pass") return Outcome::Pass;
  if (s == "fail") return Outcome::Fail;
  if (s == "unknown") return Outcome::Unknown;
  throw std::runtime_error("unknown outcome token: '" + s + "'");
}

inline std::string bits_to_string(const BitVec& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) s[i] = '1';
  return s;
}

inline BitVec bits_from_string(const std::string& s) {
  BitVec v(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      v[i] = 1;
    else if (s[i] != '0')
      throw std::runtime_error("coverage string may contain only '0'/'1'");
  }
  return v;
}

struct Element {
  MethodId method = 0;
  std::string name;
};

struct TestCase {
  std::string name;
  BitVec coverage;  // length == element count
  Outcome outcome = Outcome::Unknown;
};

// Coverage matrix plus method map, outcomes and ground-truth fault labels.
// Immutable after construction; shared freely across readers.
struct Dataset {
  std::vector<std::string> methods;  // first-appearance order
  std::vector<Element> elements;
  std::vector<TestCase> tests;
  std::vector<ElementId> faults;        // sorted, unique
  std::vector<TestId> initial_failing;  // document order

  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_tests() const { return static_cast<int>(tests.size()); }
  int num_methods() const { return static_cast<int>(methods.size()); }

  bool covers(TestId t, ElementId e) const {
    return tests[static_cast<std::size_t>(t)].coverage[static_cast<std::size_t>(e)] != 0;
  }

  std::vector<MethodId> fault_methods() const {
    std::vector<MethodId> out;
    for (ElementId e : faults) {
      MethodId m = elements[static_cast<std::size_t>(e)].method;
      bool seen = false;
      for (MethodId x : out) seen = seen || x == m;
      if (!seen) out.push_back(m);
    }
    return out;
  }

  void validate() const {
    const std::size_t n = elements.size();
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const Element& e = elements[i];
      if (e.method < 0 || e.method >= num_methods())
        throw std::runtime_error("element " + std::to_string(i) + ": method out of range");
    }
    for (std::size_t i = 0; i < tests.size(); ++i) {
      if (tests[i].coverage.size() != n)
        throw std::runtime_error("test " + std::to_string(i) + ": coverage length " +
                                 std::to_string(tests[i].coverage.size()) +
                                 " != element count " + std::to_string(n));
    }
    for (ElementId f : faults) {
      if (f < 0 || f >= num_elements())
        throw std::runtime_error("fault id " + std::to_string(f) + " out of range");
    }
    for (TestId t : initial_failing) {
      if (t < 0 || t >= num_tests())
        throw std::runtime_error("initial_failing id " + std::to_string(t) + " out of range");
      if (tests[static_cast<std::size_t>(t)].outcome != Outcome::Fail)
        throw std::runtime_error("initial_failing test " + std::to_string(t) +
                                 " does not have outcome fail");
    }
  }
};

// Parses the versioned dataset document. Ordering of elements and tests is
// preserved exactly; ids must be 0-based and contiguous.
inline Dataset load_dataset(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed dataset document: ") + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("malformed dataset document: not an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw std::runtime_error("unsupported dataset document version");

  Dataset d;
  std::unordered_map<std::string, MethodId> method_ids;
  try {
    int next_id = 0;
    for (const auto& je : doc.at("elements")) {
      if (je.at("id").get<int>() != next_id)
        throw std::runtime_error("element ids must be 0-based and contiguous");
      ++next_id;
      const std::string method = je.at("method").get<std::string>();
      auto it = method_ids.find(method);
      if (it == method_ids.end()) {
        it = method_ids.emplace(method, static_cast<MethodId>(d.methods.size())).first;
        d.methods.push_back(method);
      }
      d.elements.push_back(Element{it->second, je.at("name").get<std::string>()});
    }
    next_id = 0;
    for (const auto& jt : doc.at("tests")) {
      if (jt.at("id").get<int>() != next_id)
        throw std::runtime_error("test ids must be 0-based and contiguous");
      ++next_id;
      TestCase t;
      t.name = jt.at("name").get<std::string>();
      t.coverage = bits_from_string(jt.at("coverage").get<std::string>());
      t.outcome = outcome_from_name(jt.at("outcome").get<std::string>());
      d.tests.push_back(std::move(t));
    }
    for (const auto& jf : doc.at("faults")) d.faults.push_back(jf.get<int>());
    for (const auto& ji : doc.at("initial_failing")) d.initial_failing.push_back(ji.get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed dataset document: ") + e.what());
  }

  std::sort(d.faults.begin(), d.faults.end());
  d.faults.erase(std::unique(d.faults.begin(), d.faults.end()), d.faults.end());
  d.validate();
  return d;
}

// Canonical serialization: fixed key order, sorted fault ids, 2-space indent.
// load_dataset(serialize_dataset(d)) re-serializes byte-identically.
inline std::string serialize_dataset(const Dataset& d) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["elements"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.elements.size(); ++i) {
    nlohmann::ordered_json je;
    je["id"] = static_cast<int>(i);
    je["method"] = d.methods[static_cast<std::size_t>(d.elements[i].method)];
    je["name"] = d.elements[i].name;
    doc["elements"].push_back(std::move(je));
  }
  doc["tests"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.tests.size(); ++i) {
    nlohmann::ordered_json jt;
    jt["id"] = static_cast<int>(i);
    jt["name"] = d.tests[i].name;
    jt["coverage"] = bits_to_string(d.tests[i].coverage);
    jt["outcome"] = outcome_name(d.tests[i].outcome);
    doc["tests"].push_back(std::move(jt));
  }
  doc["faults"] = d.faults;
  doc["initial_failing"] = d.initial_failing;
  return doc.dump(2) + "\n";
}

}  // namespace rlfdc
