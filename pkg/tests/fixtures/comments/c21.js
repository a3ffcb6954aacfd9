var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var m = s.replace(/\/\//g, '/'); // escaped slashes

var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;

if (x) { /* empty */ } else { print('a/*b*/c'); }
var url = 'http://example.com/a//b'; // trailing note
var s3 = 'it\'s // fine'; // escaped quote
// standalone comment 92
