#include "csim/trace.hpp"

#include "json.hpp"
#include <ostream>

namespace csim::trace {

std::string to_json_line(const TraceRecord& r) {
    nlohmann::ordered_json j;
    j["scheme"] = r.scheme;
    j["superframe"] = r.superframe;
    j["tick"] = r.tick;
    j["wban"] = r.wban;
    j["node"] = r.node;
    j["frame"] = r.frame;
    j["slot"] = r.slot;
    j["channel"] = r.channel;
    j["outcome"] = r.outcome;
    j["detail"] = r.detail;
    return j.dump();
}

TraceRecord from_json_line(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    TraceRecord r;
    r.scheme = j.at("scheme").get<std::string>();
    r.superframe = j.at("superframe").get<std::int64_t>();
    r.tick = j.at("tick").get<std::int64_t>();
    r.wban = j.at("wban").get<int>();
    r.node = j.at("node").get<int>();
    r.frame = j.at("frame").get<std::string>();
    r.slot = j.at("slot").get<int>();
    r.channel = j.at("channel").get<int>();
    r.outcome = j.at("outcome").get<std::string>();
    r.detail = j.at("detail").get<std::map<std::string, std::int64_t>>();
    return r;
}

void TraceLog::write_jsonl(std::ostream& os) const {
    for (const auto& r : records_) os << to_json_line(r) << '\n';
}

}  // namespace csim::trace
