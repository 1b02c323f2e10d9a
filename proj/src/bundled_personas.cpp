#include "forge/scenario.h"

namespace forge {

const std::vector<std::string>& bundled_personas() {
    static const std::vector<std::string> personas = {
        "A logistics operations manager seeking advice on mitigating transport risks",
        "A warehouse supervisor responsible for inbound deliveries and stock placement",
        "A procurement specialist negotiating framework contracts with suppliers",
        "An accounts payable clerk reconciling supplier invoices at month end",
        "A financial controller preparing the quarterly close and consolidation",
        "A treasury analyst monitoring daily cash positions across bank accounts",
        "A tax accountant preparing VAT returns for several European subsidiaries",
        "A payroll administrator handling salary runs for a mid-sized manufacturer",
        "An HR business partner managing onboarding for new engineering hires",
        "A talent acquisition recruiter tracking candidates through interview stages",
        "A learning and development coordinator scheduling mandatory compliance training",
        "A sales operations analyst cleaning up pipeline data before forecast reviews",
        "A key account manager preparing renewal offers for enterprise customers",
        "A customer service team lead triaging escalated support tickets",
        "A field service dispatcher assigning technicians to maintenance orders",
        "A maintenance planner scheduling preventive work on production equipment",
        "A plant manager reviewing production order backlogs and capacity",
        "A quality assurance engineer recording inspection results for incoming batches",
        "A supply chain planner balancing demand forecasts against inventory levels",
        "A fleet manager tracking vehicle utilization and fuel costs",
        "A customs broker preparing export declarations for overseas shipments",
        "A freight forwarder coordinating container bookings with carriers",
        "A retail store manager checking stock availability across nearby branches",
        "An e-commerce merchandiser updating product listings and prices",
        "A marketing operations manager measuring campaign performance and leads",
        "A project controller tracking budgets and actual costs on customer projects",
        "A construction site manager ordering materials and logging daily progress",
        "An IT service desk agent resetting access and handling hardware requests",
        "A systems administrator managing user roles and authorizations",
        "A data protection officer responding to personal data access requests",
        "An internal auditor sampling purchase orders for policy compliance",
        "A risk manager reviewing credit exposure of large business partners",
        "A credit collections specialist following up on overdue receivables",
        "A travel coordinator booking trips and checking expense reports for staff",
        "A facilities manager handling office space reservations and repairs",
        "An energy manager monitoring electricity consumption across plants",
        "A sustainability officer collecting emissions data for annual reporting",
        "A product manager tracking feature requests from enterprise customers",
        "A pricing analyst maintaining condition records for regional price lists",
        "A master data steward cleaning duplicate customer and supplier records",
        "A utilities billing specialist correcting meter readings and invoices",
        "A hospital purchasing officer replenishing medical supplies",
        "A university administrator managing course registrations and fees",
        "A public sector grants officer tracking funding applications and payments",
        "A banking operations analyst processing payment exceptions",
        "An insurance claims handler reviewing damage reports and settlements",
        "A real estate portfolio manager tracking leases and rent escalations",
        "A shop floor supervisor confirming operations and scrap quantities",
        "A transport planner optimizing delivery routes and freight costs",
        "A small business owner looking for simple ways to manage orders and invoices",
    };
    return personas;
}

} // namespace forge
