#pragma once

// Line-delimited trace records shared by both schemes.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace csim::trace {

struct TraceRecord {
    std::string scheme;  // "CSIM" or "SSA"
    std::int64_t superframe = 0;
    std::int64_t tick = 0;
    int wban = -1;
    int node = -1;       // sensor index within the WBAN, -1 for the coordinator
    std::string frame;   // setup, tdma-data, tdma-ack, fcs-decision, fcs-beacon, fbtdma-data, fbtdma-ack, ble
    int slot = -1;
    int channel = -1;
    std::string outcome;
    std::map<std::string, std::int64_t> detail;
};

std::string to_json_line(const TraceRecord& r);
TraceRecord from_json_line(const std::string& line);

class TraceLog {
public:
    explicit TraceLog(bool enabled = true) : enabled_(enabled) {}

    bool enabled() const { return enabled_; }
    void record(TraceRecord r) {
        if (enabled_) records_.push_back(std::move(r));
    }
    const std::vector<TraceRecord>& records() const { return records_; }
    void write_jsonl(std::ostream& os) const;

private:
    bool enabled_;
    std::vector<TraceRecord> records_;
};

}  // namespace csim::trace
