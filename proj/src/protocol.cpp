#include "radeval/protocol.hpp"

#include <algorithm>
#include <cctype>

namespace radeval {

namespace {

struct TagBlock {
  std::string body;
  size_t begin = std::string::npos;
};

/// First well-formed <tag>...</tag> block at or after `from`.
std::optional<TagBlock> find_block(const std::string& text, const std::string& tag,
                                   size_t from = 0) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const size_t begin = text.find(open, from);
  if (begin == std::string::npos) return std::nullopt;
  const size_t end = text.find(close, begin + open.size());
  if (end == std::string::npos) return std::nullopt;
  return TagBlock{text.substr(begin + open.size(), end - begin - open.size()), begin};
}

int count_blocks(const std::string& text, const std::string& tag) {
  int n = 0;
  size_t pos = 0;
  while (true) {
    const auto block = find_block(text, tag, pos);
    if (!block) break;
    ++n;
    pos = block->begin + tag.size() + 2;
  }
  return n;
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  const auto b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::string strip_reflection(std::string text) {
  while (true) {
    const auto block = find_block(text, "Reflection");
    if (!block) return text;
    const std::string close = "</Reflection>";
    const size_t end = text.find(close, block->begin);
    text.erase(block->begin, end + close.size() - block->begin);
  }
}

std::optional<std::string> child(const std::string& body, const std::string& tag) {
  const auto block = find_block(body, tag);
  if (!block) return std::nullopt;
  return trimmed(block->body);
}

ProtocolMessage parse_call(const std::string& body, bool terminal) {
  CallMessage msg;
  msg.terminal = terminal;
  const auto purpose = child(body, "Purpose");
  const auto tool = child(body, "Tool");
  const auto input = child(body, "Input");
  if (!tool) return ParseFailure{"call block missing Tool child"};
  if (!input) return ParseFailure{"call block missing Input child"};
  msg.purpose = purpose.value_or("");

  // Accept "TOOL3" as well as decorated forms like "TOOL3 - ...".
  const size_t at = tool->find("TOOL");
  if (at == std::string::npos) return ParseFailure{"no tool name in Tool child"};
  size_t end = at + 4;
  while (end < tool->size() && std::isdigit(static_cast<unsigned char>((*tool)[end])))
    ++end;
  if (end == at + 4) return ParseFailure{"no tool number in Tool child"};
  msg.tool_name = tool->substr(at, end - at);

  size_t pos = 0;
  while (true) {
    const size_t open = input->find('$', pos);
    if (open == std::string::npos) break;
    const size_t close = input->find('$', open + 1);
    if (close == std::string::npos)
      return ParseFailure{"unterminated info key in Input child"};
    const std::string token = input->substr(open, close - open + 1);
    const auto key = parse_info_key(token);
    if (!key) return ParseFailure{"unknown info key in Input child: " + token};
    msg.inputs.push_back(*key);
    pos = close + 1;
  }
  return msg;
}

ProtocolMessage parse_nocall(const std::string& body) {
  NoCallMessage msg;
  const auto purpose = child(body, "Purpose");
  const auto category = child(body, "Category");
  const auto anatomy = child(body, "Anatomy");
  const auto modality = child(body, "Modality");
  const auto ability = child(body, "Ability");
  if (!category) return ParseFailure{"nocall block missing Category child"};
  if (!ability) return ParseFailure{"nocall block missing Ability child"};
  msg.purpose = purpose.value_or("");

  const auto resolved = resolve_category(*category);
  if (!resolved) return ParseFailure{"unknown category in NoCall: " + *category};
  msg.category = resolved->category;

  if (anatomy && *anatomy != "Universal") {
    const auto a = parse_anatomy(*anatomy);
    if (!a) return ParseFailure{"unknown anatomy in NoCall: " + *anatomy};
    msg.anatomy = a;
  }
  if (modality && *modality != "Universal") {
    const auto m = parse_modality(*modality);
    if (!m) return ParseFailure{"unknown modality in NoCall: " + *modality};
    msg.modality = m;
  }
  static const std::array<const char*, 3> abilities = {
      "CategoryMissing", "SpecificToolMissing", "InsufficientCapability"};
  if (std::find(abilities.begin(), abilities.end(), *ability) == abilities.end())
    return ParseFailure{"unknown ability in NoCall: " + *ability};
  msg.ability = *ability;
  return msg;
}

}  // namespace

ProtocolMessage parse_protocol(const std::string& raw) {
  const std::string text = strip_reflection(raw);
  // Tag search is literal ("<Call>"), so EndCall blocks never count as Call.
  const int calls = count_blocks(text, "Call");
  const int endcalls = count_blocks(text, "EndCall");
  const int nocalls = count_blocks(text, "NoCall");
  const int total = calls + endcalls + nocalls;
  if (total == 0) return ParseFailure{"no protocol block"};
  if (total > 1) return ParseFailure{"multiple protocol blocks"};
  if (calls == 1) return parse_call(find_block(text, "Call")->body, false);
  if (endcalls == 1) return parse_call(find_block(text, "EndCall")->body, true);
  return parse_nocall(find_block(text, "NoCall")->body);
}

std::vector<ToolCategory> Plan::chain_categories() const {
  std::vector<ToolCategory> out;
  out.reserve(tool_chain.size());
  for (const auto& u : tool_chain) out.push_back(u.category);
  return out;
}

Plan parse_decomposition(const std::string& text) {
  Plan plan;
  plan.raw_text = text;

  // Known Info: [...]
  const size_t known_at = text.find("Known Info");
  if (known_at != std::string::npos) {
    const size_t open = text.find('[', known_at);
    if (open == std::string::npos) throw MalformedKnownInfo("Known Info has no list");
    const size_t close = text.find(']', open);
    if (close == std::string::npos)
      throw MalformedKnownInfo("Known Info list is unterminated");
    const std::string body = text.substr(open + 1, close - open - 1);
    size_t pos = 0;
    while (true) {
      const size_t a = body.find('$', pos);
      if (a == std::string::npos) break;
      const size_t b = body.find('$', a + 1);
      if (b == std::string::npos) throw MalformedKnownInfo("unterminated info key");
      const std::string token = body.substr(a, b - a + 1);
      const auto key = parse_info_key(token);
      if (!key) throw MalformedKnownInfo("unknown info key: " + token);
      // The planner rule excludes $Report$ and $Treatment$ from known info.
      if (*key != InfoKey::Report && *key != InfoKey::Treatment)
        plan.known_info.insert(*key);
      pos = b + 1;
    }
  }

  // Starred tool tokens, scoped to the text after the Tool Chain marker when
  // present so prose mentions elsewhere do not leak in.
  size_t chain_at = text.find("Tool Chain");
  const std::string scope = chain_at == std::string::npos ? text
                                                          : text.substr(chain_at);
  size_t pos = 0;
  while (true) {
    const size_t a = scope.find('*', pos);
    if (a == std::string::npos) break;
    const size_t b = scope.find('*', a + 1);
    if (b == std::string::npos) break;
    const std::string token = trimmed(scope.substr(a + 1, b - a - 1));
    pos = b + 1;
    if (token.empty()) continue;
    const auto resolved = resolve_category(token);
    if (!resolved) throw UnknownCategoryToken(token);
    plan.tool_chain.push_back(PlanUnit{resolved->category, resolved->variant});
  }
  if (plan.tool_chain.empty()) throw NoChainFound("no starred tool token found");
  return plan;
}

}  // namespace radeval
