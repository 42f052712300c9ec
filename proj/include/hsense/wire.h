#ifndef HSENSE_WIRE_H_
#define HSENSE_WIRE_H_

// JSON wire encoding. A message is {body, session, stage, version} with keys
// in sorted order; body values are hex or decimal strings, or lists of them.
// Every stage has a fixed request and response schema and unknown fields are
// rejected. Any stage may instead answer with an error body
// {error: reason-tag, message}.

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/group.h"
#include "hsense/protocol.h"

namespace hsense {

inline constexpr int kWireVersion = 1;

using WireValue = std::variant<std::string, std::vector<std::string>>;

enum class Direction { kRequest, kResponse };

struct WireMessage {
  int version = kWireVersion;
  Stage stage = Stage::kSetup;
  std::string session;
  std::map<std::string, WireValue> body;
};

std::string EncodeWire(const WireMessage& msg);
// Structural checks only: shape, version, stage tag, value types.
absl::StatusOr<WireMessage> DecodeWire(std::string_view bytes);

// Field-set check against the stage schema. Error bodies pass for responses.
absl::Status CheckSchema(const WireMessage& msg, Direction direction);
bool IsErrorBody(const WireMessage& msg);

WireMessage ErrorMessage(Stage stage, std::string_view session,
                         const absl::Status& status);
// Rebuilds the status carried by an error body, reason payload included.
absl::Status ErrorFromMessage(const WireMessage& msg);

// Requests.
WireMessage EncodeSetupRequest();
WireMessage EncodeRegistrationRequest(const Group& group,
                                      const RegistrationRequest& req);
absl::StatusOr<RegistrationRequest> DecodeRegistrationRequest(
    const Group& group, const WireMessage& msg);
WireMessage EncodeSubmission(const Group& group, const Submission& sub);
absl::StatusOr<Submission> DecodeSubmission(const Group& group,
                                            const WireMessage& msg);
WireMessage EncodeClaimOpen(const Group& group, const ClaimOpenRequest& req);
absl::StatusOr<ClaimOpenRequest> DecodeClaimOpen(const Group& group,
                                                 const WireMessage& msg);
WireMessage EncodeReveal(const Group& group, Stage stage,
                         const RevealRequest& req);
absl::StatusOr<RevealRequest> DecodeReveal(const Group& group,
                                           const WireMessage& msg);
WireMessage EncodeRefresh(const Group& group, Stage stage,
                          const RefreshRequest& req);
absl::StatusOr<RefreshRequest> DecodeRefresh(const Group& group,
                                             const WireMessage& msg);
WireMessage EncodeInquiryOpen(const Group& group,
                              const InquiryOpenRequest& req);
absl::StatusOr<InquiryOpenRequest> DecodeInquiryOpen(const Group& group,
                                                     const WireMessage& msg);

// Responses.
WireMessage EncodeBundle(const PublicBundle& bundle);
absl::StatusOr<PublicBundle> DecodeBundle(const WireMessage& msg);
WireMessage EncodeRegistrationReply(const Group& group,
                                    const RegistrationReply& reply);
absl::StatusOr<RegistrationReply> DecodeRegistrationReply(
    const Group& group, const WireMessage& msg);
WireMessage EncodeAck(Stage stage, std::string_view session);
WireMessage EncodeCreditOffer(const Group& group, std::string_view session,
                              const CreditOffer& offer);
absl::StatusOr<CreditOffer> DecodeCreditOffer(const Group& group,
                                              const WireMessage& msg);
WireMessage EncodeSignatureReply(Stage stage, std::string_view session,
                                 const Signature& sig);
absl::StatusOr<Signature> DecodeSignatureReply(const WireMessage& msg);
WireMessage EncodeInquiryResult(std::string_view session,
                                const InquiryResult& result);
absl::StatusOr<InquiryResult> DecodeInquiryResult(const WireMessage& msg);

}  // namespace hsense

#endif  // HSENSE_WIRE_H_
