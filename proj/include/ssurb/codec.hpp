#pragma once

// JSON forms of protocol values, used by trace files and snapshots.
// Field order is canonical (insertion order of ordered_json) so that dumps,
// and the digests computed from them, are stable.

#include "ssurb/detectors.hpp"
#include "ssurb/node.hpp"
#include "ssurb/types.hpp"

#include <json.hpp>

#include <stdexcept>

namespace ssurb {

using Json = nlohmann::ordered_json;

class DecodeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A packet is well formed when its ids are in [1, n] and a MSG carries a payload.
bool isWellFormed(const WireMessage& m, int n) noexcept;

Json toJson(const Payload& p);
Payload payloadFromJson(const Json& j);

Json toJson(const WireMessage& m);
/// Throws DecodeError on unknown kinds, missing fields or a malformed packet.
WireMessage wireFromJson(const Json& j, int n);

Json toJson(const BufferRecord& r);
BufferRecord recordFromJson(const Json& j);

Json toJson(const NodeState& s);
NodeState nodeStateFromJson(const Json& j);

Json toJson(const HbState& s);
HbState hbStateFromJson(const Json& j);

Json toJson(const ThetaState& s);
ThetaState thetaStateFromJson(const Json& j);

Json toJson(const NodeSet& s);
NodeSet nodeSetFromJson(const Json& j);

std::string hex64(std::uint64_t v);

} // namespace ssurb
