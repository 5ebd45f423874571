#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace toolrank {

struct ApiDoc {
  std::string api_id;
  std::string tool_id;
  std::string api_name;
  std::string description;
  std::string document_text;

  friend bool operator==(const ApiDoc&, const ApiDoc&) = default;
};

struct Tool {
  std::string tool_id;
  std::string tool_name;
  std::string category;
  std::vector<std::string> api_ids;

  friend bool operator==(const Tool&, const Tool&) = default;
};

enum class QueryType { single_tool, multi_tool };

std::string_view to_string(QueryType type);
QueryType parse_query_type(std::string_view text);

/// Immutable two-level tool hierarchy plus the set of tools seen at training
/// time. Instances are only produced by `build`, which enforces closure of all
/// tool/api cross references.
class ToolLibrary {
 public:
  ToolLibrary() = default;

  /// Validates and assembles a library. APIs whose document_text is empty are
  /// rendered with render_document.
  static ToolLibrary build(std::vector<Tool> tools, std::vector<ApiDoc> apis,
                           std::vector<std::string> seen_tools);

  const std::map<std::string, Tool, std::less<>>& tools() const noexcept { return tools_; }
  const std::map<std::string, ApiDoc, std::less<>>& apis() const noexcept { return apis_; }
  const std::set<std::string, std::less<>>& seen_tools() const noexcept { return seen_; }

  const Tool& tool(std::string_view tool_id) const;
  const ApiDoc& api(std::string_view api_id) const;
  const Tool& tool_of(std::string_view api_id) const;
  bool contains_api(std::string_view api_id) const { return apis_.find(api_id) != apis_.end(); }
  bool is_seen(std::string_view tool_id) const { return seen_.find(tool_id) != seen_.end(); }

  std::size_t api_count() const noexcept { return apis_.size(); }

  friend bool operator==(const ToolLibrary&, const ToolLibrary&) = default;

 private:
  std::map<std::string, Tool, std::less<>> tools_;
  std::map<std::string, ApiDoc, std::less<>> apis_;
  std::set<std::string, std::less<>> seen_;
};

/// "category | tool_name | api_name | description", whitespace collapsed to
/// single spaces and trailing whitespace removed.
std::string render_document(const ApiDoc& api, const Tool& tool);

ToolLibrary load_library(const std::string& path);
ToolLibrary read_library(std::istream& in, const std::string& source_name);
void write_library(const ToolLibrary& library, std::ostream& out);
void save_library(const ToolLibrary& library, const std::string& path);

struct EvalRecord {
  std::string query_id;
  std::string query_text;
  std::vector<std::string> gold_api_ids;  // sorted, unique
  QueryType gold_query_type = QueryType::single_tool;
  std::string subset;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Checks record invariants against the library: gold ids resolve and the
/// query type matches the number of distinct gold tools.
void validate_record(const EvalRecord& record, const ToolLibrary& library);

/// Query type implied by the gold set: single_tool iff every gold API shares a tool.
QueryType implied_query_type(const std::vector<std::string>& gold_api_ids, const ToolLibrary& library);

/// Loads a JSON Lines queries/qrels file. When `library` is given, every record
/// is validated against it.
std::vector<EvalRecord> load_records(const std::string& path, const ToolLibrary* library = nullptr);
std::vector<EvalRecord> read_records(std::istream& in, const std::string& source_name,
                                     const ToolLibrary* library = nullptr);
void write_records(const std::vector<EvalRecord>& records, std::ostream& out);
void save_records(const std::vector<EvalRecord>& records, const std::string& path);

}  // namespace toolrank
